use crate::error::Result;
use crate::game::GameSpec;
use crate::profile::DecisionProfile;
use crate::sampling::RngStream;

use super::{estimate, forward_backward, parse_params, Algorithm, NoParams, SolverState, StepSize};

/// Stochastic projected reflected gradient: the direction is sampled at the
/// reflected point `2x − x_prev`.
#[derive(Clone, Debug, Default)]
pub struct Sprg;

impl Sprg {
    pub fn from_params(params: &serde_json::Value) -> Result<Box<dyn Algorithm>> {
        let NoParams {} = parse_params("sprg", params)?;
        Ok(Box::new(Sprg))
    }
}

impl Algorithm for Sprg {
    fn name(&self) -> &'static str {
        "sprg"
    }

    /// Warm start `x_prev = x0`.
    fn init(&self, x0: DecisionProfile, stream: RngStream) -> SolverState {
        let mut s = SolverState::new(x0.clone(), stream);
        s.x_prev = Some(x0);
        s
    }

    fn step(&self, game: &GameSpec, state: &SolverState, gamma: &StepSize, batch: u64) -> SolverState {
        sprg_step(game, state, gamma.clone(), batch)
    }
}

/// `x⁺ = prox(x − γF̂(2x − x_prev, ξ))`, then `x_prev⁺ = x`.
///
/// A missing `x_prev` is treated as `x`.
pub fn sprg_step(game: &GameSpec, state: &SolverState, gamma: impl Into<StepSize>, batch: u64) -> SolverState {
    let x = state.x.values();
    let reflected: Vec<f64> = match &state.x_prev {
        Some(prev) if prev.values() != x => x.iter().zip(prev.values()).map(|(a, b)| 2.0 * a - b).collect(),
        _ => x.to_vec(),
    };
    let d = estimate(game, state, &reflected, batch, 0);
    let next = forward_backward(game, x, &d, &gamma.into());
    let mut out = state.advance(next, batch.max(1));
    out.x_prev = Some(state.x.clone());
    out
}
