use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::error::Result;
use crate::game::GameSpec;
use crate::sampling::RngStream;
use crate::schedule::StepSchedule;

use super::{estimate, forward_backward, parse_params, Algorithm, SolverState, StepSize};

/// Sample index reserved for the smoothing perturbation of an iteration.
const SHIFT_SAMPLE: u64 = u64::MAX;

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RssaParams {
    delta: StepSchedule,
    eta: StepSchedule,
}

impl Default for RssaParams {
    fn default() -> Self {
        Self { delta: StepSchedule::polynomial(1.0, 1.0, 1.0), eta: StepSchedule::polynomial(1.0, 1000.0, 0.5) }
    }
}

/// Regularized smoothed stochastic approximation: the oracle is queried at a
/// point perturbed uniformly in a ball of radius `δ_k`, and the direction
/// gains an `η_k x` regularization term.
#[derive(Clone, Debug)]
pub struct Rssa {
    pub delta: StepSchedule,
    pub eta: StepSchedule,
}

impl Default for Rssa {
    fn default() -> Self {
        let p = RssaParams::default();
        Self { delta: p.delta, eta: p.eta }
    }
}

impl Rssa {
    pub fn from_params(params: &serde_json::Value) -> Result<Box<dyn Algorithm>> {
        let p: RssaParams = parse_params("rssa", params)?;
        p.delta.validate_nonnegative()?;
        p.eta.validate_nonnegative()?;
        Ok(Box::new(Rssa { delta: p.delta, eta: p.eta }))
    }
}

impl Algorithm for Rssa {
    fn name(&self) -> &'static str {
        "rssa"
    }

    fn step(&self, game: &GameSpec, state: &SolverState, gamma: &StepSize, batch: u64) -> SolverState {
        rssa_step(game, state, gamma.clone(), self.delta.at(state.k), self.eta.at(state.k), batch)
    }
}

/// Uniform draw from the `dim`-ball of radius `radius`.
pub fn sample_ball<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    let scale = if norm > 0.0 { r / norm } else { 0.0 };
    v.iter_mut().for_each(|a| *a *= scale);
    v
}

fn shift_stream(state: &SolverState) -> RngStream {
    state.stream.at(state.k, SHIFT_SAMPLE)
}

/// `z ~ U(B_δ)`, `x⁺ = prox(x − γ(F̂(x + z, ξ) + η x))`.
pub fn rssa_step(
    game: &GameSpec,
    state: &SolverState,
    gamma: impl Into<StepSize>,
    delta: f64,
    eta: f64,
    batch: u64,
) -> SolverState {
    if delta == 0.0 {
        return rssa_step_with_shift(game, state, gamma, None, eta, batch);
    }
    let z = sample_ball(game.dim(), delta, &mut shift_stream(state).rng());
    rssa_step_with_shift(game, state, gamma, Some(&z), eta, batch)
}

/// RSSA update with an explicit perturbation `z` (`None` for no smoothing).
pub fn rssa_step_with_shift(
    game: &GameSpec,
    state: &SolverState,
    gamma: impl Into<StepSize>,
    shift: Option<&[f64]>,
    eta: f64,
    batch: u64,
) -> SolverState {
    let x = state.x.values();
    let mut d = match shift {
        Some(z) => {
            let point: Vec<f64> = x.iter().zip(z).map(|(a, b)| a + b).collect();
            estimate(game, state, &point, batch, 0)
        }
        None => estimate(game, state, x, batch, 0),
    };
    if eta != 0.0 {
        for (di, xi) in d.iter_mut().zip(x) {
            *di += eta * xi;
        }
    }
    let next = forward_backward(game, x, &d, &gamma.into());
    state.advance(next, batch.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = RngStream::new(3, 0).rng();
        for _ in 0..1000 {
            let z = sample_ball(3, 0.5, &mut rng);
            assert!(z.iter().map(|a| a * a).sum::<f64>().sqrt() <= 0.5 + 1e-15);
        }
    }
}
