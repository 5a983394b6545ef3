//! The game description consumed by every algorithm.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{residual, ProxDescriptor};
use crate::profile::{DecisionProfile, Partition};
use crate::sampling::{RngStream, StreamRng};

/// Sampled pseudogradient: the stacked `∇_{x_i} f_i(x, ξ_i)` for one joint
/// realization `ξ` drawn from `rng`.
pub trait NoisyOracle: Send + Sync {
    fn sample_into(&self, x: &[f64], rng: &mut StreamRng, out: &mut [f64]);

    /// Average of the `batch` realizations addressed by `stream.sample ..`.
    ///
    /// `scratch` has the length of `out`. With `batch == 1` the result must
    /// be bit-identical to [`sample_into`](Self::sample_into) with `stream.rng()`.
    fn sample_mean_into(&self, x: &[f64], stream: RngStream, batch: u64, out: &mut [f64], scratch: &mut [f64]) {
        let mut rngs = stream.sample_rngs(batch.max(1));
        let mut first = rngs.next().expect("batch >= 1");
        self.sample_into(x, &mut first, out);
        if batch <= 1 {
            return;
        }
        for mut rng in rngs {
            self.sample_into(x, &mut rng, scratch);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += s;
            }
        }
        let s = batch as f64;
        out.iter_mut().for_each(|o| *o /= s);
    }
}

/// Exact expected pseudogradient `𝔽(x)`.
pub trait MeanOracle: Send + Sync {
    fn mean_into(&self, x: &[f64], out: &mut [f64]);
}

impl<F> NoisyOracle for F
where
    F: Fn(&[f64], &mut StreamRng, &mut [f64]) + Send + Sync,
{
    fn sample_into(&self, x: &[f64], rng: &mut StreamRng, out: &mut [f64]) {
        self(x, rng, out)
    }
}

impl<F> MeanOracle for F
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn mean_into(&self, x: &[f64], out: &mut [f64]) {
        self(x, out)
    }
}

/// Monte Carlo stand-in for a missing closed-form mean.
///
/// Averages `samples` draws from a fixed stream, so the result is a
/// deterministic function of `x`.
pub struct MonteCarloMean {
    oracle: Arc<dyn NoisyOracle>,
    samples: u64,
    stream: RngStream,
}

impl MonteCarloMean {
    pub const DEFAULT_SAMPLES: u64 = 100_000;

    pub fn new(oracle: Arc<dyn NoisyOracle>, samples: u64, seed: u64) -> Self {
        Self { oracle, samples: samples.max(1), stream: RngStream::new(seed, u64::MAX) }
    }
}

impl MeanOracle for MonteCarloMean {
    fn mean_into(&self, x: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; out.len()];
        out.iter_mut().for_each(|o| *o = 0.0);
        for mut rng in self.stream.sample_rngs(self.samples) {
            self.oracle.sample_into(x, &mut rng, &mut tmp);
            for (o, v) in out.iter_mut().zip(&tmp) {
                *o += v;
            }
        }
        let s = self.samples as f64;
        out.iter_mut().for_each(|o| *o /= s);
    }
}

/// Optional structural constants of `𝔽` at the solution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Restricted strong monotonicity `μ`.
    pub strong_monotonicity: Option<f64>,
    /// Restricted Lipschitz constant `ℓ`.
    pub lipschitz: Option<f64>,
    /// Restricted cocoercivity `β`.
    pub cocoercivity: Option<f64>,
}

impl Constants {
    /// `2μ/ℓ²` when both constants are known.
    pub fn strong_step_bound(&self) -> Option<f64> {
        Some(2.0 * self.strong_monotonicity? / self.lipschitz?.powi(2))
    }

    /// `2β` when cocoercivity is known.
    pub fn cocoercive_step_bound(&self) -> Option<f64> {
        self.cocoercivity.map(|b| 2.0 * b)
    }
}

#[derive(Clone)]
struct MeanHandle {
    oracle: Arc<dyn MeanOracle>,
    /// Sample count when the mean is a Monte Carlo estimate.
    approximate: Option<u64>,
}

/// A stochastic Nash equilibrium problem in pseudogradient form.
#[derive(Clone)]
pub struct GameSpec {
    name: String,
    partition: Partition,
    prox_ops: Vec<ProxDescriptor>,
    noisy: Arc<dyn NoisyOracle>,
    mean: Option<MeanHandle>,
    known_solution: Option<DecisionProfile>,
    constants: Constants,
    variance_bound: Option<f64>,
}

impl fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameSpec")
            .field("name", &self.name)
            .field("partition", &self.partition.sizes())
            .field("prox_ops", &self.prox_ops)
            .field("has_mean", &self.mean.is_some())
            .field("known_solution", &self.known_solution)
            .field("constants", &self.constants)
            .finish()
    }
}

impl GameSpec {
    pub fn builder(name: impl Into<String>, sizes: &[usize], noisy: Arc<dyn NoisyOracle>) -> Result<GameBuilder> {
        let partition = Partition::new(sizes)?;
        Ok(GameBuilder {
            spec: GameSpec {
                name: name.into(),
                prox_ops: vec![ProxDescriptor::Identity; partition.n_agents()],
                partition,
                noisy,
                mean: None,
                known_solution: None,
                constants: Constants::default(),
                variance_bound: None,
            },
            solution: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn prox_ops(&self) -> &[ProxDescriptor] {
        &self.prox_ops
    }

    pub fn noisy_oracle(&self) -> &dyn NoisyOracle {
        &*self.noisy
    }

    pub fn mean_oracle(&self) -> Option<&dyn MeanOracle> {
        self.mean.as_ref().map(|m| &*m.oracle)
    }

    /// Sample count of a Monte Carlo mean oracle; `None` for exact means.
    pub fn mean_is_approximate(&self) -> Option<u64> {
        self.mean.as_ref().and_then(|m| m.approximate)
    }

    pub fn known_solution(&self) -> Option<&DecisionProfile> {
        self.known_solution.as_ref()
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    /// Declared `σ²` with `E‖F_SA(x,·) − 𝔽(x)‖² ≤ σ²` on the feasible set.
    pub fn variance_bound(&self) -> Option<f64> {
        self.variance_bound
    }

    pub fn mean(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.mean_oracle().ok_or_else(|| Error::MissingMeanOracle(self.name.clone()))?;
        let mut out = vec![0.0; self.dim()];
        m.mean_into(x, &mut out);
        Ok(out)
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && self.prox_ops.iter().enumerate().all(|(i, p)| p.contains(&x[self.partition.range(i)]))
    }

    /// Agentwise prox of the zero vector.
    pub fn default_initial_point(&self) -> DecisionProfile {
        let values = self
            .prox_ops
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.initial_block(self.partition.block_size(i)))
            .collect();
        DecisionProfile::new(values, self.partition.clone()).expect("prox preserves block sizes")
    }

    pub fn profile(&self, values: Vec<f64>) -> Result<DecisionProfile> {
        DecisionProfile::new(values, self.partition.clone())
    }
}

pub struct GameBuilder {
    spec: GameSpec,
    solution: Option<Vec<f64>>,
}

impl GameBuilder {
    pub fn prox_ops(mut self, ops: Vec<ProxDescriptor>) -> Self {
        self.spec.prox_ops = ops;
        self
    }

    pub fn mean_oracle(mut self, oracle: Arc<dyn MeanOracle>) -> Self {
        self.spec.mean = Some(MeanHandle { oracle, approximate: None });
        self
    }

    /// Installs a Monte Carlo mean built from the noisy oracle.
    pub fn monte_carlo_mean(mut self, samples: u64, seed: u64) -> Self {
        let oracle = Arc::new(MonteCarloMean::new(self.spec.noisy.clone(), samples, seed));
        self.spec.mean = Some(MeanHandle { oracle, approximate: Some(samples.max(1)) });
        self
    }

    pub fn known_solution(mut self, x: Vec<f64>) -> Self {
        self.solution = Some(x);
        self
    }

    pub fn constants(mut self, constants: Constants) -> Self {
        self.spec.constants = constants;
        self
    }

    pub fn variance_bound(mut self, sigma2: f64) -> Self {
        self.spec.variance_bound = Some(sigma2);
        self
    }

    pub fn build(self) -> Result<GameSpec> {
        let mut spec = self.spec;
        if let Some(x) = self.solution {
            spec.known_solution = Some(DecisionProfile::new(x, spec.partition.clone())?);
        }
        if spec.prox_ops.len() != spec.partition.n_agents() {
            return Err(Error::InvalidGame(format!(
                "{} prox operators for {} agents",
                spec.prox_ops.len(),
                spec.partition.n_agents()
            )));
        }
        for (i, p) in spec.prox_ops.iter().enumerate() {
            if let Some(d) = p.fixed_dim() {
                if d != spec.partition.block_size(i) {
                    return Err(Error::InvalidGame(format!(
                        "agent {i}: prox has dimension {d}, block has {}",
                        spec.partition.block_size(i)
                    )));
                }
            }
        }
        let c = spec.constants;
        for (name, v) in [
            ("strong monotonicity", c.strong_monotonicity),
            ("lipschitz", c.lipschitz),
            ("cocoercivity", c.cocoercivity),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidGame(format!("{name} constant {v} must be positive")));
                }
            }
        }
        if let (Some(mu), Some(l)) = (c.strong_monotonicity, c.lipschitz) {
            if mu > l {
                return Err(Error::InvalidGame(format!("strong monotonicity {mu} exceeds lipschitz {l}")));
            }
        }
        if let (Some(x), Some(_)) = (&spec.known_solution, &spec.mean) {
            let r = residual(&spec, x)?;
            if r > 1e-9 {
                return Err(Error::InvalidGame(format!("known solution has residual {r:e}")));
            }
        }
        Ok(spec)
    }
}
