//! Iterations-to-threshold as a function of the noise variance.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::thread_pool;
use crate::algorithms::{run_with_index, AlgorithmRegistry, RunRecord};
use crate::config::AlgorithmConfig;
use crate::error::{Error, Result};
use crate::games::{game_b, GameBParams};
use crate::schedule::StepSchedule;

fn default_variances() -> Vec<f64> {
    vec![0.1, 1.0, 10.0, 100.0]
}

fn default_thresholds() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}

fn default_runs() -> u64 {
    10
}

fn default_algorithm() -> AlgorithmConfig {
    AlgorithmConfig::new("sfb", StepSchedule::constant(0.05), 10_000).with_initial_point(vec![1.0, 1.0, 1.0])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceStudyConfig {
    /// Mean matrix and constraint set; `variance` is replaced by each grid value.
    #[serde(default)]
    pub game: GameBParams,
    #[serde(default = "default_variances")]
    pub variances: Vec<f64>,
    /// Strictly decreasing precisions.
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs: u64,
    /// Scheme to time; its `tol` and `metric_stride` are overridden.
    #[serde(default = "default_algorithm")]
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Default for VarianceStudyConfig {
    fn default() -> Self {
        Self {
            game: GameBParams::default(),
            variances: default_variances(),
            thresholds: default_thresholds(),
            runs: default_runs(),
            algorithm: default_algorithm(),
            base_seed: 0,
            output_dir: None,
            workers: None,
        }
    }
}

impl VarianceStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be >= 1".into()));
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidConfig("thresholds must be positive".into()));
        }
        if self.thresholds.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidConfig("thresholds must be strictly decreasing".into()));
        }
        if self.variances.is_empty() || self.variances.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidConfig("variances must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Mean first-crossing iteration for one (variance, threshold) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdCell {
    pub threshold: f64,
    /// Mean over the runs that reached the threshold.
    pub mean_iterations: Option<f64>,
    pub reached_runs: u64,
    pub runs: u64,
}

impl ThresholdCell {
    pub fn reached_by_all(&self) -> bool {
        self.reached_runs == self.runs
    }

    /// Mean iterations, or `+∞` when some run never reached the threshold.
    pub fn iterations_or_inf(&self) -> f64 {
        match self.mean_iterations {
            Some(m) if self.reached_by_all() => m,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceRow {
    pub variance: f64,
    pub cells: Vec<ThresholdCell>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceTable {
    pub thresholds: Vec<f64>,
    pub rows: Vec<VarianceRow>,
}

impl VarianceTable {
    pub fn cell(&self, variance: f64, threshold: f64) -> Option<&ThresholdCell> {
        self.rows
            .iter()
            .find(|r| r.variance == variance)
            .and_then(|r| r.cells.iter().find(|c| c.threshold == threshold))
    }
}

/// First recorded iteration (the initial point counts as 0) whose residual is
/// at most `threshold`.
pub fn first_crossing(record: &RunRecord, threshold: f64) -> Option<u64> {
    std::iter::once(&record.initial)
        .chain(&record.records)
        .find(|r| r.residual.is_some_and(|v| v <= threshold))
        .map(|r| r.iteration)
}

pub fn variance_study(config: &VarianceStudyConfig) -> Result<VarianceTable> {
    config.validate()?;
    let registry = AlgorithmRegistry::with_builtins();
    let tightest = *config.thresholds.last().expect("validated non-empty");
    let mut algorithm = config.algorithm.clone();
    algorithm.metric_stride = 1;
    algorithm.tol = Some(tightest);

    let games = config
        .variances
        .iter()
        .map(|&v| game_b(&GameBParams { variance: v, ..config.game.clone() })?.to_spec())
        .collect::<Result<Vec<_>>>()?;
    for g in &games {
        algorithm.validate(g, &registry)?;
    }

    let jobs: Vec<(usize, u64)> = (0..games.len()).flat_map(|v| (0..config.runs).map(move |r| (v, r))).collect();
    let pool = thread_pool(config.workers)?;
    let crossings: Vec<Result<Vec<Option<u64>>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(v, r)| {
                let mut cfg = algorithm.clone();
                cfg.seed = config.base_seed.wrapping_add(r);
                let rec = match run_with_index(&games[v], &cfg, r, &registry, &mut |_| {}) {
                    Ok(rec) => rec,
                    // a diverged run never reaches any threshold
                    Err(Error::Divergence { .. }) => return Ok(vec![None; config.thresholds.len()]),
                    Err(e) => return Err(e),
                };
                Ok(config.thresholds.iter().map(|&t| first_crossing(&rec, t)).collect())
            })
            .collect()
    });
    let crossings = crossings.into_iter().collect::<Result<Vec<_>>>()?;

    let rows = config
        .variances
        .iter()
        .enumerate()
        .map(|(vi, &variance)| {
            let mine: Vec<&Vec<Option<u64>>> =
                jobs.iter().zip(&crossings).filter(|((v, _), _)| *v == vi).map(|(_, c)| c).collect();
            let cells = config
                .thresholds
                .iter()
                .enumerate()
                .map(|(ti, &threshold)| {
                    let hits: Vec<u64> = mine.iter().filter_map(|c| c[ti]).collect();
                    ThresholdCell {
                        threshold,
                        mean_iterations: (!hits.is_empty())
                            .then(|| hits.iter().map(|&h| h as f64).sum::<f64>() / hits.len() as f64),
                        reached_runs: hits.len() as u64,
                        runs: config.runs,
                    }
                })
                .collect();
            VarianceRow { variance, cells }
        })
        .collect();
    let table = VarianceTable { thresholds: config.thresholds.clone(), rows };
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        write_variance_csv(&dir.join("variance.csv"), &table)?;
    }
    Ok(table)
}

/// Columns: variance, threshold, mean_iterations (empty if no run reached it), reached_runs, runs.
pub fn write_variance_csv(path: &Path, table: &VarianceTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["variance", "threshold", "mean_iterations", "reached_runs", "runs"])?;
    for row in &table.rows {
        for c in &row.cells {
            w.write_record([
                row.variance.to_string(),
                c.threshold.to_string(),
                c.mean_iterations.map(|m| m.to_string()).unwrap_or_default(),
                c.reached_runs.to_string(),
                c.runs.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
