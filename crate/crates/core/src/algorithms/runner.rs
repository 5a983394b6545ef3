use std::time::Instant;

use crate::config::AlgorithmConfig;
use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::operators::residual;
use crate::profile::DecisionProfile;
use crate::sampling::RngStream;

use super::{AlgorithmRegistry, StepSize};

/// Metrics of one recorded iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// Number of completed steps.
    pub iteration: u64,
    pub residual: Option<f64>,
    pub distance: Option<f64>,
    /// Cumulative joint realizations.
    pub samples: u64,
    /// Cumulative wall time spent in steps.
    pub elapsed_ns: u64,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub label: String,
    pub algorithm: String,
    pub run_index: u64,
    pub seed: u64,
    /// Metrics of the starting point.
    pub initial: IterationRecord,
    /// Every `metric_stride`-th iterate, plus the last one.
    pub records: Vec<IterationRecord>,
    pub final_x: DecisionProfile,
    pub stopped_early: bool,
    /// Sample count of an approximate (Monte Carlo) residual.
    pub approximate_residual: Option<u64>,
}

impl RunRecord {
    pub fn last(&self) -> &IterationRecord {
        self.records.last().unwrap_or(&self.initial)
    }
}

fn metrics(game: &GameSpec, x: &DecisionProfile, iteration: u64, samples: u64, elapsed_ns: u64) -> IterationRecord {
    IterationRecord {
        iteration,
        residual: game.mean_oracle().map(|_| residual(game, x).expect("dimension checked")),
        distance: game.known_solution().map(|s| s.distance(x)),
        samples,
        elapsed_ns,
    }
}

/// Runs one trajectory with run index 0. See [`run_with_index`].
pub fn run(
    game: &GameSpec,
    config: &AlgorithmConfig,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<RunRecord> {
    run_with_index(game, config, 0, &AlgorithmRegistry::with_builtins(), observer)
}

/// Executes `config.max_iters` steps from the configured (or default) initial
/// point, drawing realizations from the stream `(config.seed, run_index)`.
pub fn run_with_index(
    game: &GameSpec,
    config: &AlgorithmConfig,
    run_index: u64,
    registry: &AlgorithmRegistry,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<RunRecord> {
    config.validate(game, registry)?;
    let algorithm = config.build_algorithm(registry)?;
    let x0 = match &config.initial_point {
        Some(v) => game.profile(v.clone())?,
        None => game.default_initial_point(),
    };
    let stride = config.metric_stride.max(1);
    let mut state = algorithm.init(x0.clone(), RngStream::new(config.seed, run_index));
    let initial = metrics(game, &x0, 0, 0, 0);
    let mut records = Vec::with_capacity((config.max_iters / stride + 1) as usize);
    let mut elapsed_ns: u64 = 0;
    let mut stopped_early = false;

    for k in 0..config.max_iters {
        let g = config.step.at(k);
        let gamma = match &config.agent_step_scale {
            Some(s) => StepSize::scaled(g, s),
            None => StepSize::Shared(g),
        };
        let batch = config.estimator.batch_at(k);
        let t0 = Instant::now();
        state = algorithm.step(game, &state, &gamma, batch);
        elapsed_ns += t0.elapsed().as_nanos() as u64;
        if !state.x.is_finite() {
            return Err(Error::Divergence { iteration: k + 1 });
        }
        debug_assert!(game.is_feasible(state.x.values()), "iterate left the feasible set at {}", k + 1);
        let it = k + 1;
        if it % stride == 0 || it == config.max_iters {
            let rec = metrics(game, &state.x, it, state.samples, elapsed_ns);
            observer(&rec);
            let done = matches!((config.tol, rec.residual), (Some(t), Some(r)) if r <= t);
            records.push(rec);
            if done {
                stopped_early = it < config.max_iters;
                break;
            }
        }
    }

    Ok(RunRecord {
        label: config.label().to_string(),
        algorithm: algorithm.name().to_string(),
        run_index,
        seed: config.seed,
        initial,
        records,
        final_x: state.x,
        stopped_early,
        approximate_residual: game.mean_is_approximate(),
    })
}
