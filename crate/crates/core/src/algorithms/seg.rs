use crate::error::Result;
use crate::game::GameSpec;

use super::{estimate, forward_backward, parse_params, Algorithm, NoParams, SolverState, StepSize};

/// Stochastic extragradient: an extrapolation step to `y`, then the update
/// from `x` with the direction sampled at `y`.
#[derive(Clone, Debug, Default)]
pub struct Seg;

impl Seg {
    pub fn from_params(params: &serde_json::Value) -> Result<Box<dyn Algorithm>> {
        let NoParams {} = parse_params("seg", params)?;
        Ok(Box::new(Seg))
    }
}

impl Algorithm for Seg {
    fn name(&self) -> &'static str {
        "seg"
    }

    fn evaluations_per_step(&self) -> u64 {
        2
    }

    fn step(&self, game: &GameSpec, state: &SolverState, gamma: &StepSize, batch: u64) -> SolverState {
        seg_step(game, state, gamma.clone(), batch)
    }
}

/// `y = prox(x − γF̂(x, ξ))`, `x⁺ = prox(x − γF̂(y, η))` with independent `ξ`, `η`.
pub fn seg_step(game: &GameSpec, state: &SolverState, gamma: impl Into<StepSize>, batch: u64) -> SolverState {
    let gamma = gamma.into();
    let x = state.x.values();
    let d = estimate(game, state, x, batch, 0);
    let y = forward_backward(game, x, &d, &gamma);
    let d = estimate(game, state, &y, batch, 1);
    let next = forward_backward(game, x, &d, &gamma);
    state.advance(next, 2 * batch.max(1))
}
