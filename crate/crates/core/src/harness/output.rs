//! CSV persistence. Columns are fixed; missing metrics are written as empty fields.

use std::path::Path;

use super::{AggregateSeries, RunOutcome};
use crate::error::{Error, Result};

pub const RAW_HEADER: [&str; 7] = ["algorithm", "run", "iteration", "residual", "distance", "samples", "elapsed_ns"];

pub const AGGREGATE_HEADER: [&str; 8] = [
    "algorithm",
    "iteration",
    "mean_residual",
    "smooth_residual",
    "mean_distance",
    "mean_samples",
    "mean_elapsed_ns",
    "excluded_runs",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_raw_csv(path: &Path, runs: &[RunOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RAW_HEADER)?;
    for o in runs {
        let Ok(rec) = &o.result else { continue };
        for r in &rec.records {
            w.write_record([
                o.label.clone(),
                o.run.to_string(),
                r.iteration.to_string(),
                opt(r.residual),
                opt(r.distance),
                r.samples.to_string(),
                r.elapsed_ns.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv(path: &Path, series: &AggregateSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for a in &series.algorithms {
        for (i, it) in a.iterations.iter().enumerate() {
            let at = |v: &Option<Vec<f64>>| opt(v.as_ref().map(|s| s[i]));
            w.write_record([
                a.label.clone(),
                it.to_string(),
                at(&a.mean_residual),
                at(&a.smooth_residual),
                at(&a.mean_distance),
                a.mean_samples[i].to_string(),
                a.mean_elapsed_ns[i].to_string(),
                a.excluded_runs.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One line per trajectory with its status; diverged runs carry the failing iteration.
pub fn write_run_summary_csv(path: &Path, runs: &[RunOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["algorithm", "run", "seed", "status", "diverged_at", "final_residual", "final_distance"])?;
    for o in runs {
        let (status, at, res, dist) = match &o.result {
            Ok(r) => ("ok", String::new(), opt(r.last().residual), opt(r.last().distance)),
            Err(Error::Divergence { iteration }) => ("diverged", iteration.to_string(), String::new(), String::new()),
            Err(_) => ("error", String::new(), String::new(), String::new()),
        };
        w.write_record([o.label.clone(), o.run.to_string(), o.seed.to_string(), status.into(), at, res, dist])?;
    }
    w.flush()?;
    Ok(())
}
