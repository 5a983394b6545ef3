//! Proximal operators and the residual merit function.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::profile::DecisionProfile;

/// `(v, γ) ↦ argmin_u { γ g(u) + ½‖u − v‖² }` for a user-supplied `g`.
pub type CustomProx = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;

/// The nonsmooth part `g_i` of one agent's cost, described by its prox.
#[derive(Clone)]
pub enum ProxDescriptor {
    /// Indicator of `[lower, upper]`; the prox is a coordinatewise clamp.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Identity,
    /// `λ‖u‖₁`; the prox is soft thresholding at `γλ`.
    L1 { weight: f64 },
    Custom(CustomProx),
}

impl fmt::Debug for ProxDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProxDescriptor::Box { lower, upper } => {
                f.debug_struct("Box").field("lower", lower).field("upper", upper).finish()
            }
            ProxDescriptor::Identity => f.write_str("Identity"),
            ProxDescriptor::L1 { weight } => f.debug_struct("L1").field("weight", weight).finish(),
            ProxDescriptor::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl ProxDescriptor {
    pub fn bounded(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if let Some(i) = lower.iter().zip(&upper).position(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidGame(format!(
                "box bound {i}: lower {} exceeds upper {}",
                lower[i], upper[i]
            )));
        }
        Ok(ProxDescriptor::Box { lower, upper })
    }

    /// `[-radius, radius]^dim`.
    pub fn symmetric_box(dim: usize, radius: f64) -> Result<Self> {
        Self::bounded(vec![-radius; dim], vec![radius; dim])
    }

    pub fn l1(weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::InvalidGame(format!("l1 weight {weight} must be finite and >= 0")));
        }
        Ok(ProxDescriptor::L1 { weight })
    }

    pub fn custom(f: impl Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        ProxDescriptor::Custom(Arc::new(f))
    }

    /// Dimension this descriptor is tied to, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            ProxDescriptor::Box { lower, .. } => Some(lower.len()),
            _ => None,
        }
    }

    /// Evaluates the prox of `γ g` at `v`.
    pub fn prox(&self, v: &[f64], gamma: f64) -> Result<Vec<f64>> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { context: "prox input" });
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::NonFinite { context: "prox step" });
        }
        if let Some(d) = self.fixed_dim() {
            if d != v.len() {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
        }
        let mut out = v.to_vec();
        self.prox_in_place(&mut out, gamma);
        Ok(out)
    }

    /// Unchecked prox used on the hot path; `v` is overwritten with the result.
    pub fn prox_in_place(&self, v: &mut [f64], gamma: f64) {
        match self {
            ProxDescriptor::Box { lower, upper } => {
                for ((x, &lo), &hi) in v.iter_mut().zip(lower).zip(upper) {
                    *x = x.max(lo).min(hi);
                }
            }
            ProxDescriptor::Identity => {}
            ProxDescriptor::L1 { weight } => {
                let t = gamma * weight;
                for x in v.iter_mut() {
                    *x = x.signum() * (x.abs() - t).max(0.0);
                }
            }
            ProxDescriptor::Custom(f) => {
                let out = f(v, gamma);
                v.copy_from_slice(&out);
            }
        }
    }

    /// Whether `v` lies in `dom g`. Custom descriptors are trusted.
    pub fn contains(&self, v: &[f64]) -> bool {
        match self {
            ProxDescriptor::Box { lower, upper } => {
                v.len() == lower.len() && v.iter().zip(lower).zip(upper).all(|((x, lo), hi)| lo <= x && x <= hi)
            }
            _ => v.iter().all(|x| x.is_finite()),
        }
    }

    /// Default starting block: the prox of the zero vector.
    pub fn initial_block(&self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        self.prox_in_place(&mut v, 1.0);
        v
    }
}

/// Applies each agent's prox to its block of `v`, with per-agent steps.
pub(crate) fn blockwise_prox_in_place(game: &GameSpec, v: &mut [f64], gammas: &[f64]) {
    let partition = game.partition();
    for (i, desc) in game.prox_ops().iter().enumerate() {
        desc.prox_in_place(&mut v[partition.range(i)], gammas[i]);
    }
}

/// `‖x − prox_g(x − 𝔽(x))‖` with a unit step inside the prox.
///
/// Zero exactly at fixed points of the forward-backward map, i.e. at
/// solutions of the variational inequality.
pub fn residual(game: &GameSpec, x: &DecisionProfile) -> Result<f64> {
    let mean = game.mean_oracle().ok_or_else(|| Error::MissingMeanOracle(game.name().to_string()))?;
    if x.dim() != game.dim() {
        return Err(Error::DimensionMismatch { expected: game.dim(), found: x.dim() });
    }
    let xv = x.values();
    let mut v = vec![0.0; xv.len()];
    mean.mean_into(xv, &mut v);
    for (vi, xi) in v.iter_mut().zip(xv) {
        *vi = xi - *vi;
    }
    let ones = vec![1.0; game.partition().n_agents()];
    blockwise_prox_in_place(game, &mut v, &ones);
    Ok(crate::profile::distance(xv, &v))
}
