use crate::error::Result;
use crate::game::GameSpec;

use super::{estimate, forward_backward, parse_params, Algorithm, NoParams, SolverState, StepSize};

/// Stochastic forward-backward: `x⁺ = prox_{γg}(x − γ F̂(x, ξ))`.
#[derive(Clone, Debug, Default)]
pub struct Sfb;

impl Sfb {
    pub fn from_params(params: &serde_json::Value) -> Result<Box<dyn Algorithm>> {
        let NoParams {} = parse_params("sfb", params)?;
        Ok(Box::new(Sfb))
    }
}

impl Algorithm for Sfb {
    fn name(&self) -> &'static str {
        "sfb"
    }

    fn step(&self, game: &GameSpec, state: &SolverState, gamma: &StepSize, batch: u64) -> SolverState {
        sfb_step(game, state, gamma.clone(), batch)
    }
}

/// One synchronous forward-backward step with a batch of `batch` realizations
/// (`1` is the one-sample scheme).
pub fn sfb_step(game: &GameSpec, state: &SolverState, gamma: impl Into<StepSize>, batch: u64) -> SolverState {
    let x = state.x.values();
    let d = estimate(game, state, x, batch, 0);
    let next = forward_backward(game, x, &d, &gamma.into());
    state.advance(next, batch.max(1))
}
