use serde::Deserialize;

use crate::error::Result;
use crate::game::GameSpec;
use crate::schedule::StepSchedule;

use super::{estimate, forward_backward, parse_params, Algorithm, SolverState, StepSize};

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TikParams {
    eps: StepSchedule,
}

impl Default for TikParams {
    fn default() -> Self {
        Self { eps: StepSchedule::polynomial(1.0, 1000.0, 0.5) }
    }
}

/// Tikhonov-regularized stochastic projection: the direction gains a vanishing `ε_k x` term.
#[derive(Clone, Debug)]
pub struct Tik {
    pub eps: StepSchedule,
}

impl Default for Tik {
    fn default() -> Self {
        Self { eps: TikParams::default().eps }
    }
}

impl Tik {
    pub fn from_params(params: &serde_json::Value) -> Result<Box<dyn Algorithm>> {
        let p: TikParams = parse_params("tik", params)?;
        p.eps.validate_nonnegative()?;
        Ok(Box::new(Tik { eps: p.eps }))
    }
}

impl Algorithm for Tik {
    fn name(&self) -> &'static str {
        "tik"
    }

    fn step(&self, game: &GameSpec, state: &SolverState, gamma: &StepSize, batch: u64) -> SolverState {
        tik_step(game, state, gamma.clone(), self.eps.at(state.k), batch)
    }
}

/// `x⁺ = prox(x − γ(F̂(x, ξ) + ε x))`.
pub fn tik_step(game: &GameSpec, state: &SolverState, gamma: impl Into<StepSize>, eps: f64, batch: u64) -> SolverState {
    let x = state.x.values();
    let mut d = estimate(game, state, x, batch, 0);
    if eps != 0.0 {
        for (di, xi) in d.iter_mut().zip(x) {
            *di += eps * xi;
        }
    }
    let next = forward_backward(game, x, &d, &gamma.into());
    state.advance(next, batch.max(1))
}
