//! Per-run algorithm configuration.

use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, AlgorithmRegistry};
use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::sampling::Scheme;
use crate::schedule::{BatchSchedule, StepSchedule};

/// How the expected pseudogradient is approximated at each step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Estimator {
    /// One realization per oracle call.
    #[default]
    Sa,
    /// Average of `batch.at(k)` realizations per oracle call.
    Vr { batch: BatchSchedule },
}

impl Estimator {
    pub fn batch_at(&self, k: u64) -> u64 {
        match self {
            Estimator::Sa => 1,
            Estimator::Vr { batch } => batch.at(k),
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            Estimator::Sa => Scheme::Sa,
            Estimator::Vr { .. } => Scheme::Vr,
        }
    }
}

fn default_stride() -> u64 {
    1
}

/// Algorithm selector plus everything needed to run it once.
///
/// `params` holds the scheme-specific parameter group (e.g. `eps` for `tik`);
/// it is parsed by the scheme's factory, which rejects groups that belong to
/// other schemes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// Display name; defaults to the algorithm name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
    pub step: StepSchedule,
    #[serde(default)]
    pub estimator: Estimator,
    pub max_iters: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_point: Option<Vec<f64>>,
    /// Positive per-agent multipliers on the shared step size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_step_scale: Option<Vec<f64>>,
    /// Early stop once the residual is at most this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default = "default_stride")]
    pub metric_stride: u64,
}

impl AlgorithmConfig {
    pub fn new(algorithm: impl Into<String>, step: StepSchedule, max_iters: u64) -> Self {
        Self {
            label: None,
            algorithm: algorithm.into(),
            params: serde_json::Value::Null,
            step,
            estimator: Estimator::Sa,
            max_iters,
            seed: 0,
            initial_point: None,
            agent_step_scale: None,
            tol: None,
            metric_stride: 1,
        }
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn with_params(mut self, params: serde_json::Value) -> Self {
        self.params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_initial_point(mut self, x0: Vec<f64>) -> Self {
        self.initial_point = Some(x0);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.algorithm)
    }

    pub fn build_algorithm(&self, registry: &AlgorithmRegistry) -> Result<Box<dyn Algorithm>> {
        registry.build(&self.algorithm, &self.params)
    }

    /// Structural checks against the game; does not judge convergence theory.
    pub fn validate(&self, game: &GameSpec, registry: &AlgorithmRegistry) -> Result<()> {
        self.build_algorithm(registry)?;
        self.step.validate_step()?;
        if let Estimator::Vr { batch } = &self.estimator {
            batch.validate()?;
        }
        if self.metric_stride == 0 {
            return Err(Error::InvalidConfig("metric_stride must be >= 1".into()));
        }
        if let Some(tol) = self.tol {
            if !(tol >= 0.0) {
                return Err(Error::InvalidConfig(format!("tol {tol} must be >= 0")));
            }
        }
        if let Some(s) = &self.agent_step_scale {
            let n = game.partition().n_agents();
            if s.len() != n {
                return Err(Error::InvalidConfig(format!("agent_step_scale has {} entries for {n} agents", s.len())));
            }
            if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::InvalidConfig("agent_step_scale entries must be positive".into()));
            }
        }
        if let Some(x0) = &self.initial_point {
            if x0.len() != game.dim() {
                return Err(Error::InvalidConfig(format!(
                    "initial_point has {} entries, game dimension is {}",
                    x0.len(),
                    game.dim()
                )));
            }
            if !game.is_feasible(x0) {
                return Err(Error::InvalidConfig("initial_point lies outside the feasible set".into()));
            }
        }
        Ok(())
    }
}
