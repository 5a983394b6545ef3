//! Noise models, counter-addressed random streams and the two
//! expectation-approximation oracles.
//!
//! Every joint realization is addressed by `(seed, run, iteration, sample)`.
//! The generator for that address is derived from the address alone, so the
//! order in which samples are drawn (or whether they are drawn concurrently)
//! never changes their values.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::profile::DecisionProfile;

/// Generator handed to noisy oracles.
pub type StreamRng = SplitMix64;

/// Address of one joint realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub run: u64,
    pub iteration: u64,
    pub sample: u64,
}

fn mix(x: u64) -> u64 {
    SplitMix64::seed_from_u64(x).next_u64()
}

impl RngStream {
    pub fn new(seed: u64, run: u64) -> Self {
        Self { seed, run, iteration: 0, sample: 0 }
    }

    pub fn at(&self, iteration: u64, sample: u64) -> Self {
        Self { iteration, sample, ..*self }
    }

    pub fn with_sample(&self, sample: u64) -> Self {
        Self { sample, ..*self }
    }

    fn prefix(&self) -> u64 {
        mix(mix(mix(self.seed) ^ self.run) ^ self.iteration)
    }

    pub fn rng(&self) -> StreamRng {
        SplitMix64::seed_from_u64(mix(self.prefix() ^ self.sample))
    }

    /// Generators of samples `self.sample .. self.sample + count`, in order.
    ///
    /// Each item equals `self.with_sample(s).rng()`.
    pub fn sample_rngs(&self, count: u64) -> impl Iterator<Item = StreamRng> {
        let (prefix, first) = (self.prefix(), self.sample);
        (0..count).map(move |t| SplitMix64::seed_from_u64(mix(prefix ^ first.wrapping_add(t))))
    }
}

/// Scalar distribution of one random game parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    Normal { mean: f64, std: f64 },
    Uniform { lower: f64, upper: f64 },
    Degenerate { value: f64 },
}

impl NoiseModel {
    /// Normal, or degenerate when `std == 0`.
    pub fn normal(mean: f64, std: f64) -> Self {
        if std == 0.0 {
            NoiseModel::Degenerate { value: mean }
        } else {
            NoiseModel::Normal { mean, std }
        }
    }

    /// Uniform with the given mean and standard deviation.
    pub fn uniform_with_std(mean: f64, std: f64) -> Self {
        let half = std * 3f64.sqrt();
        NoiseModel::Uniform { lower: mean - half, upper: mean + half }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseModel::Normal { mean, std } => mean.is_finite() && std.is_finite() && std >= 0.0,
            NoiseModel::Uniform { lower, upper } => lower.is_finite() && upper.is_finite() && lower <= upper,
            NoiseModel::Degenerate { value } => value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGame(format!("ill-formed noise model {self:?}")))
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Normal { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + std * z
            }
            NoiseModel::Uniform { lower, upper } => lower + (upper - lower) * rng.random::<f64>(),
            NoiseModel::Degenerate { value } => value,
        }
    }

    /// A draw minus the mean. Uses the generator exactly as [`sample`](Self::sample) does.
    #[inline]
    pub fn deviation<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Normal { std, .. } => {
                let z: f64 = StandardNormal.sample(rng);
                std * z
            }
            NoiseModel::Uniform { lower, upper } => (upper - lower) * (rng.random::<f64>() - 0.5),
            NoiseModel::Degenerate { .. } => 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            NoiseModel::Normal { mean, .. } => mean,
            NoiseModel::Uniform { lower, upper } => 0.5 * (lower + upper),
            NoiseModel::Degenerate { value } => value,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            NoiseModel::Normal { std, .. } => std * std,
            NoiseModel::Uniform { lower, upper } => (upper - lower).powi(2) / 12.0,
            NoiseModel::Degenerate { .. } => 0.0,
        }
    }
}

/// Expectation-approximation scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// One joint realization per evaluation.
    Sa,
    /// Average of a batch of joint realizations.
    Vr,
}

/// `F_SA(x, ξ)` for the realization addressed by `stream`.
pub fn sa_sample(game: &GameSpec, x: &DecisionProfile, stream: RngStream) -> Vec<f64> {
    let mut out = vec![0.0; game.dim()];
    let mut rng = stream.rng();
    game.noisy_oracle().sample_into(x.values(), &mut rng, &mut out);
    out
}

/// `(1/S) Σ_t F_SA(x, ξ^(t))` over samples `stream.sample .. stream.sample + S`.
pub fn vr_sample(game: &GameSpec, x: &DecisionProfile, batch: u64, stream: RngStream) -> Vec<f64> {
    let mut out = vec![0.0; game.dim()];
    let mut scratch = vec![0.0; game.dim()];
    estimate_into(game, x.values(), batch, stream, &mut out, &mut scratch);
    out
}

/// Batch estimate written into `out`; `scratch` must have the same length.
///
/// With `batch == 1` the result is bit-identical to [`sa_sample`] at the
/// same address.
pub(crate) fn estimate_into(
    game: &GameSpec,
    x: &[f64],
    batch: u64,
    stream: RngStream,
    out: &mut [f64],
    scratch: &mut [f64],
) {
    game.noisy_oracle().sample_mean_into(x, stream, batch.max(1), out, scratch);
}

/// Empirical statistics of the stochastic error `ε = F̂(x, ·) − 𝔽(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorStats {
    pub mean_error: Vec<f64>,
    /// Per-coordinate standard error of `mean_error`.
    pub std_error: Vec<f64>,
    /// Empirical `E‖ε‖²`.
    pub mean_sq_norm: f64,
    pub trials: u64,
}

impl ErrorStats {
    /// Largest `|mean_error_j| / std_error_j` over coordinates with nonzero spread.
    pub fn max_z_score(&self) -> f64 {
        self.mean_error
            .iter()
            .zip(&self.std_error)
            .map(|(m, s)| if *s > 0.0 { m.abs() / s } else if *m == 0.0 { 0.0 } else { f64::INFINITY })
            .fold(0.0, f64::max)
    }
}

/// Trial `t` reads the batch at `stream.at(t, 0)`.
pub fn error_stats(
    game: &GameSpec,
    x: &DecisionProfile,
    scheme: Scheme,
    batch: u64,
    trials: u64,
    stream: RngStream,
) -> Result<ErrorStats> {
    if trials < 100 {
        return Err(Error::InvalidConfig(format!("error statistics need at least 100 trials, got {trials}")));
    }
    let mean = game.mean(x.values())?;
    let n = game.dim();
    let batch = match scheme {
        Scheme::Sa => 1,
        Scheme::Vr => batch.max(1),
    };
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    let mut norm_sq = 0.0;
    let mut est = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for t in 0..trials {
        estimate_into(game, x.values(), batch, stream.at(t, 0), &mut est, &mut scratch);
        for j in 0..n {
            let e = est[j] - mean[j];
            sum[j] += e;
            sum_sq[j] += e * e;
            norm_sq += e * e;
        }
    }
    let tf = trials as f64;
    let mean_error: Vec<f64> = sum.iter().map(|s| s / tf).collect();
    let std_error = sum_sq
        .iter()
        .zip(&mean_error)
        .map(|(sq, m)| {
            let var = ((sq - tf * m * m) / (tf - 1.0)).max(0.0);
            (var / tf).sqrt()
        })
        .collect();
    Ok(ErrorStats { mean_error, std_error, mean_sq_norm: norm_sq / tf, trials })
}
