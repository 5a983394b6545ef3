//! Iteration schemes behind a common [`Algorithm`] trait.
//!
//! Every scheme is a forward-backward style update
//! `x⁺ = prox_{γg}(x − γ d)` that differs only in how the direction `d` is
//! built. Schemes are registered by name in an [`AlgorithmRegistry`] and
//! instantiated from JSON parameters.

mod rssa;
mod runner;
mod seg;
mod sfb;
mod sprg;
mod tik;

use std::collections::BTreeMap;
use std::fmt;

use serde::de::DeserializeOwned;

pub use rssa::{rssa_step, rssa_step_with_shift, sample_ball, Rssa};
pub use runner::{run, run_with_index, IterationRecord, RunRecord};
pub use seg::{seg_step, Seg};
pub use sfb::{sfb_step, Sfb};
pub use sprg::{sprg_step, Sprg};
pub use tik::{tik_step, Tik};

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::operators::blockwise_prox_in_place;
use crate::profile::DecisionProfile;
use crate::sampling::{estimate_into, RngStream};

/// Step size for one iteration, shared or scaled per agent.
#[derive(Clone, Debug, PartialEq)]
pub enum StepSize {
    Shared(f64),
    PerAgent(Vec<f64>),
}

impl StepSize {
    pub fn scaled(gamma: f64, scales: &[f64]) -> Self {
        StepSize::PerAgent(scales.iter().map(|s| gamma * s).collect())
    }

    fn per_agent(&self, n_agents: usize) -> Vec<f64> {
        match self {
            StepSize::Shared(g) => vec![*g; n_agents],
            StepSize::PerAgent(v) => {
                assert_eq!(v.len(), n_agents, "one step size per agent");
                v.clone()
            }
        }
    }
}

impl From<f64> for StepSize {
    fn from(g: f64) -> Self {
        StepSize::Shared(g)
    }
}

/// Iterate plus the bookkeeping a scheme needs between steps.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub x: DecisionProfile,
    /// Previous iterate, kept by reflected schemes.
    pub x_prev: Option<DecisionProfile>,
    pub k: u64,
    /// Run-level stream; iteration and sample are taken from `k` and the scheme.
    pub stream: RngStream,
    /// Cumulative joint realizations drawn.
    pub samples: u64,
}

impl SolverState {
    pub fn new(x: DecisionProfile, stream: RngStream) -> Self {
        Self { x, x_prev: None, k: 0, stream, samples: 0 }
    }

    fn advance(&self, x: Vec<f64>, samples: u64) -> Self {
        Self {
            x: self.x.with_values(x).expect("update preserves dimension"),
            x_prev: self.x_prev.clone(),
            k: self.k + 1,
            stream: self.stream,
            samples: self.samples + samples,
        }
    }
}

/// One interchangeable iteration scheme.
pub trait Algorithm: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Oracle evaluations per iteration; each consumes one batch.
    fn evaluations_per_step(&self) -> u64 {
        1
    }

    fn init(&self, x0: DecisionProfile, stream: RngStream) -> SolverState {
        SolverState::new(x0, stream)
    }

    fn step(&self, game: &GameSpec, state: &SolverState, gamma: &StepSize, batch: u64) -> SolverState;
}

/// Oracle estimate at `point` for evaluation slot `slot` of iteration `state.k`.
///
/// Slot `j` reads samples `j·S .. (j+1)·S`, so a second evaluation within one
/// iteration never reuses realizations.
pub(crate) fn estimate(game: &GameSpec, state: &SolverState, point: &[f64], batch: u64, slot: u64) -> Vec<f64> {
    let batch = batch.max(1);
    let mut out = vec![0.0; game.dim()];
    let mut scratch = vec![0.0; game.dim()];
    estimate_into(game, point, batch, state.stream.at(state.k, slot * batch), &mut out, &mut scratch);
    out
}

/// `prox_{γ_i g_i}(base_i − γ_i direction_i)` for every agent, all read from
/// the same pre-step profile.
pub(crate) fn forward_backward(game: &GameSpec, base: &[f64], direction: &[f64], gamma: &StepSize) -> Vec<f64> {
    let gammas = gamma.per_agent(game.partition().n_agents());
    let partition = game.partition();
    let mut out = base.to_vec();
    for (i, g) in gammas.iter().enumerate() {
        for j in partition.range(i) {
            out[j] = base[j] - g * direction[j];
        }
    }
    blockwise_prox_in_place(game, &mut out, &gammas);
    out
}

pub(crate) fn parse_params<T: DeserializeOwned + Default>(algorithm: &str, params: &serde_json::Value) -> Result<T> {
    let empty = params.is_null() || params.as_object().is_some_and(|m| m.is_empty());
    if empty {
        return Ok(T::default());
    }
    serde_path_to_error::deserialize(params)
        .map_err(|e| Error::InvalidConfig(format!("{algorithm} params: {} at `{}`", e.inner(), e.path())))
}

/// Parameterless schemes accept only an empty parameter object.
#[derive(Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct NoParams {}

/// Builds a scheme from its JSON parameters.
pub type AlgorithmFactory = fn(&serde_json::Value) -> Result<Box<dyn Algorithm>>;

/// Schemes selectable by name.
pub struct AlgorithmRegistry {
    entries: BTreeMap<&'static str, AlgorithmFactory>,
}

impl Default for AlgorithmRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl AlgorithmRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("sfb", Sfb::from_params);
        r.register("seg", Seg::from_params);
        r.register("tik", Tik::from_params);
        r.register("rssa", Rssa::from_params);
        r.register("sprg", Sprg::from_params);
        r
    }

    pub fn register(&mut self, name: &'static str, factory: AlgorithmFactory) {
        self.entries.insert(name, factory);
    }

    pub fn build(&self, name: &str, params: &serde_json::Value) -> Result<Box<dyn Algorithm>> {
        let key = name.to_ascii_lowercase();
        let factory = self.entries.get(key.as_str()).ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))?;
        factory(params)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn registry_builds_each_scheme() {
        let r = AlgorithmRegistry::with_builtins();
        for name in ["sfb", "seg", "tik", "rssa", "sprg", "SFB"] {
            let a = r.build(name, &serde_json::Value::Null).unwrap();
            assert_eq!(a.name(), name.to_ascii_lowercase());
        }
        assert!(matches!(r.build("eg", &json!({})), Err(Error::UnknownAlgorithm(_))));
    }

    #[test]
    fn parameter_groups_belong_to_their_scheme() {
        let r = AlgorithmRegistry::with_builtins();
        let eps = json!({"eps": {"kind": "constant", "value": 0.1}});
        assert!(r.build("tik", &eps).is_ok());
        assert!(r.build("sfb", &eps).is_err());
        assert!(r.build("rssa", &eps).is_err());
        assert!(r.build("rssa", &json!({"delta": {"kind": "constant", "value": 0.0}})).is_ok());
    }

    #[test]
    fn seg_draws_two_batches() {
        let r = AlgorithmRegistry::with_builtins();
        assert_eq!(r.build("seg", &json!(null)).unwrap().evaluations_per_step(), 2);
        assert_eq!(r.build("sprg", &json!(null)).unwrap().evaluations_per_step(), 1);
    }
}
