//! Multi-seed experiments, aggregation, smoothing and CSV persistence.

mod output;
mod variance;

use std::collections::HashSet;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use output::{write_aggregate_csv, write_raw_csv, write_run_summary_csv, AGGREGATE_HEADER, RAW_HEADER};
pub use variance::{
    first_crossing, variance_study, write_variance_csv, ThresholdCell, VarianceRow, VarianceStudyConfig, VarianceTable,
};

use crate::algorithms::{run_with_index, AlgorithmRegistry, RunRecord};
use crate::compliance;
use crate::config::AlgorithmConfig;
use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::games::GameRegistry;

/// Environment variable holding the default number of worker threads.
pub const WORKERS_ENV: &str = "SNEP_WORKERS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSelection {
    pub name: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
}

impl GameSelection {
    pub fn build(&self, registry: &GameRegistry) -> Result<GameSpec> {
        registry.build(&self.name, &self.params)
    }
}

fn default_runs() -> u64 {
    100
}

fn default_window() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSelection,
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default = "default_window")]
    pub smoothing_window: usize,
    /// Overrides every algorithm's `metric_stride` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_stride: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Turn failed convergence checks into errors.
    #[serde(default)]
    pub strict: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be >= 1".into()));
        }
        if self.smoothing_window == 0 {
            return Err(Error::InvalidConfig("smoothing_window must be >= 1".into()));
        }
        if self.metric_stride == Some(0) {
            return Err(Error::InvalidConfig("metric_stride must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms configured".into()));
        }
        let mut seen = HashSet::new();
        for a in &self.algorithms {
            if !seen.insert(a.label()) {
                return Err(Error::InvalidConfig(format!("duplicate algorithm label `{}`", a.label())));
            }
        }
        Ok(())
    }

    /// The configuration of `algorithm` for run `run`: seed `base_seed + run`.
    pub fn run_config(&self, algorithm: &AlgorithmConfig, run: u64) -> AlgorithmConfig {
        let mut c = algorithm.clone();
        c.seed = self.base_seed.wrapping_add(run);
        if let Some(s) = self.metric_stride {
            c.metric_stride = s;
        }
        c
    }
}

/// Per-algorithm aggregate over the included runs.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmSeries {
    pub label: String,
    pub iterations: Vec<u64>,
    pub mean_residual: Option<Vec<f64>>,
    pub smooth_residual: Option<Vec<f64>>,
    pub mean_distance: Option<Vec<f64>>,
    pub mean_samples: Vec<f64>,
    pub mean_elapsed_ns: Vec<f64>,
    pub included_runs: u64,
    pub excluded_runs: u64,
}

impl AlgorithmSeries {
    pub fn final_smoothed_residual(&self) -> Option<f64> {
        self.smooth_residual.as_ref().and_then(|s| s.last().copied())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateSeries {
    pub algorithms: Vec<AlgorithmSeries>,
}

impl AggregateSeries {
    pub fn get(&self, label: &str) -> Option<&AlgorithmSeries> {
        self.algorithms.iter().find(|a| a.label == label)
    }
}

/// Outcome of one trajectory inside an experiment.
#[derive(Debug)]
pub struct RunOutcome {
    pub label: String,
    pub run: u64,
    pub seed: u64,
    pub result: Result<RunRecord>,
}

pub struct ExperimentOutcome {
    pub series: AggregateSeries,
    pub runs: Vec<RunOutcome>,
}

/// Trailing moving average; the first points average over `min(k+1, w)` values.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..values.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            values[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect()
}

fn mean_over<F>(runs: &[&RunRecord], len: usize, f: F) -> Option<Vec<f64>>
where
    F: Fn(&RunRecord, usize) -> Option<f64>,
{
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let mut sum = 0.0;
        let mut count = 0u64;
        for r in runs.iter().filter(|r| r.records.len() > i) {
            if let Some(v) = f(r, i) {
                sum += v;
                count += 1;
            }
        }
        if count == 0 {
            return None;
        }
        out.push(sum / count as f64);
    }
    Some(out)
}

/// Aggregates the runs of one algorithm; `outcomes` must be in run order.
pub fn aggregate(label: &str, outcomes: &[&RunOutcome], window: usize) -> AlgorithmSeries {
    let ok: Vec<&RunRecord> = outcomes.iter().filter_map(|o| o.result.as_ref().ok()).collect();
    let excluded = (outcomes.len() - ok.len()) as u64;
    let longest = ok.iter().max_by_key(|r| r.records.len());
    let iterations: Vec<u64> = longest.map(|r| r.records.iter().map(|x| x.iteration).collect()).unwrap_or_default();
    let len = iterations.len();
    let mean_residual = mean_over(&ok, len, |r, i| r.records[i].residual);
    let smooth_residual = mean_residual.as_ref().map(|m| smooth(m, window));
    let mean_distance = mean_over(&ok, len, |r, i| r.records[i].distance);
    let mean_samples = mean_over(&ok, len, |r, i| Some(r.records[i].samples as f64)).unwrap_or_default();
    let mean_elapsed_ns = mean_over(&ok, len, |r, i| Some(r.records[i].elapsed_ns as f64)).unwrap_or_default();
    AlgorithmSeries {
        label: label.to_string(),
        iterations,
        mean_residual,
        smooth_residual,
        mean_distance,
        mean_samples,
        mean_elapsed_ns,
        included_runs: ok.len() as u64,
        excluded_runs: excluded,
    }
}

pub(crate) fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = workers
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
}

/// Runs every algorithm `config.runs` times and aggregates per iteration.
///
/// Writes `raw.csv`, `aggregate.csv` and `runs.csv` when `output_dir` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with(config, &GameRegistry::with_builtins(), &AlgorithmRegistry::with_builtins())
}

pub fn run_experiment_with(
    config: &ExperimentConfig,
    games: &GameRegistry,
    algorithms: &AlgorithmRegistry,
) -> Result<ExperimentOutcome> {
    config.validate()?;
    let game = config.game.build(games)?;
    for a in &config.algorithms {
        a.validate(&game, algorithms)?;
        if config.strict {
            compliance::check(a, game.constants()).enforce()?;
        }
    }

    let jobs: Vec<(usize, u64)> =
        (0..config.algorithms.len()).flat_map(|a| (0..config.runs).map(move |r| (a, r))).collect();
    let pool = thread_pool(config.workers)?;
    let runs: Vec<RunOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(a, r)| {
                let cfg = config.run_config(&config.algorithms[a], r);
                RunOutcome {
                    label: cfg.label().to_string(),
                    run: r,
                    seed: cfg.seed,
                    result: run_with_index(&game, &cfg, r, algorithms, &mut |_| {}),
                }
            })
            .collect()
    });

    // Configuration problems surface as errors; only numerical divergence excludes a run.
    if let Some(e) = runs.iter().find_map(|o| match &o.result {
        Err(Error::Divergence { .. }) | Ok(_) => None,
        Err(e) => Some(e.to_string()),
    }) {
        return Err(Error::InvalidConfig(e));
    }

    let series = AggregateSeries {
        algorithms: config
            .algorithms
            .iter()
            .map(|a| {
                let mine: Vec<&RunOutcome> = runs.iter().filter(|o| o.label == a.label()).collect();
                aggregate(a.label(), &mine, config.smoothing_window)
            })
            .collect(),
    };

    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        write_raw_csv(&dir.join("raw.csv"), &runs)?;
        write_aggregate_csv(&dir.join("aggregate.csv"), &series)?;
        write_run_summary_csv(&dir.join("runs.csv"), &runs)?;
    }
    Ok(ExperimentOutcome { series, runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_truncates_at_start() {
        let s = smooth(&[1.0, 3.0, 5.0, 7.0], 2);
        assert_eq!(s, vec![1.0, 2.0, 4.0, 6.0]);
    }

    #[test]
    fn smoothing_keeps_constants() {
        let v = vec![0.3; 10_000];
        assert!(smooth(&v, 50).iter().all(|x| (x - 0.3).abs() < 1e-15));
    }

    #[test]
    fn rejects_duplicate_labels() {
        let a = AlgorithmConfig::new("sfb", crate::schedule::StepSchedule::constant(0.1), 1);
        let cfg = ExperimentConfig {
            game: GameSelection { name: "diag".into(), params: serde_json::Value::Null },
            algorithms: vec![a.clone(), a],
            runs: 1,
            smoothing_window: 1,
            metric_stride: None,
            output_dir: None,
            base_seed: 0,
            workers: Some(1),
            strict: false,
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }
}
