//! Concrete game instances and the by-name game registry.

mod linear;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use linear::{LinearStochasticGame, NoisyEntry};

use crate::error::{Error, Result};
use crate::game::{Constants, GameSpec};
use crate::operators::ProxDescriptor;
use crate::sampling::{NoiseModel, RngStream};

/// Distribution family used for randomized matrix entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    #[default]
    Normal,
    Uniform,
}

impl NoiseFamily {
    fn model(self, mean: f64, std: f64) -> NoiseModel {
        match self {
            _ if std == 0.0 => NoiseModel::Degenerate { value: mean },
            NoiseFamily::Normal => NoiseModel::normal(mean, std),
            NoiseFamily::Uniform => NoiseModel::uniform_with_std(mean, std),
        }
    }
}

/// Parameters of the two-player comparative game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameAParams {
    /// Standard deviation of the off-diagonal entry in row 1.
    pub xi1_std: f64,
    /// Standard deviation of the off-diagonal entry in row 2.
    pub xi2_std: f64,
    /// Box half-width `θ`.
    pub theta: f64,
    pub noise: NoiseFamily,
}

impl Default for GameAParams {
    fn default() -> Self {
        Self { xi1_std: 0.1, xi2_std: 10.0, theta: 1000.0, noise: NoiseFamily::Normal }
    }
}

fn two_player(name: &str, xi1_mean: f64, xi2_mean: f64, p: &GameAParams) -> Result<LinearStochasticGame> {
    if !(p.theta > 0.0) {
        return Err(Error::InvalidGame(format!("theta {} must be positive", p.theta)));
    }
    let boxed = ProxDescriptor::symmetric_box(1, p.theta)?;
    LinearStochasticGame::new(
        name,
        vec![1.0, xi1_mean, xi2_mean, 1000.0],
        vec![
            NoisyEntry { row: 0, col: 1, model: p.noise.model(xi1_mean, p.xi1_std) },
            NoisyEntry { row: 1, col: 0, model: p.noise.model(xi2_mean, p.xi2_std) },
        ],
        vec![1, 1],
        vec![boxed.clone(), boxed],
    )
}

/// `F(x) = [[1, ξ1], [ξ2, 1000]] x` with `E[ξ1] = 1`, `E[ξ2] = 1000` on `[−θ, θ]²`.
///
/// The symmetric part of the mean matrix is indefinite, so this instance is
/// not monotone; it is kept for reproducing the comparative runs.
pub fn game_a_verbatim(params: &GameAParams) -> Result<LinearStochasticGame> {
    two_player("game_a", 1.0, 1000.0, params)
}

/// Same structure with `E[ξ2] = −1`: symmetric part `diag(1, 1000)`, so `μ = 1`.
pub fn game_a_repaired(params: &GameAParams) -> Result<LinearStochasticGame> {
    two_player("game_a_repaired", 1.0, -1.0, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameBParams {
    /// Seed of the random mean matrix.
    pub seed: u64,
    /// Variance of the antidiagonal entries.
    pub variance: f64,
    /// Box `[−bound, bound]³` when true, unconstrained otherwise.
    pub constrained: bool,
    pub bound: f64,
}

impl Default for GameBParams {
    fn default() -> Self {
        Self { seed: 0, variance: 1.0, constrained: true, bound: 10.0 }
    }
}

/// Symmetric positive definite `3 × 3` matrix drawn from `seed`.
///
/// `A` has i.i.d. uniform `[0, 1)` entries; `A + Aᵀ` is shifted by
/// `(|λ_min| + 1) I` when it is not positive definite.
pub fn random_pd_matrix(seed: u64) -> DMatrix<f64> {
    let mut rng = RngStream::new(seed, 0).rng();
    let a = DMatrix::from_fn(3, 3, |_, _| rng.random::<f64>());
    let mut s = &a + a.transpose();
    let lmin = SymmetricEigen::new(s.clone()).eigenvalues.min();
    if lmin <= 0.0 {
        s += DMatrix::identity(3, 3) * (lmin.abs() + 1.0);
    }
    s
}

/// Three players; the antidiagonal entries `(1,3)`, `(2,2)`, `(3,1)` are
/// normal around the mean matrix with the given variance.
pub fn game_b(params: &GameBParams) -> Result<LinearStochasticGame> {
    if !(params.variance >= 0.0 && params.variance.is_finite()) {
        return Err(Error::InvalidGame(format!("variance {} must be >= 0", params.variance)));
    }
    let m = random_pd_matrix(params.seed);
    let std = params.variance.sqrt();
    let noise = [(0, 2), (1, 1), (2, 0)]
        .into_iter()
        .map(|(r, c)| NoisyEntry { row: r, col: c, model: NoiseModel::normal(m[(r, c)], std) })
        .collect();
    let prox = if params.constrained {
        if !(params.bound > 0.0) {
            return Err(Error::InvalidGame(format!("bound {} must be positive", params.bound)));
        }
        ProxDescriptor::symmetric_box(1, params.bound)?
    } else {
        ProxDescriptor::Identity
    };
    let rows: Vec<f64> = (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).map(|(r, c)| m[(r, c)]).collect();
    LinearStochasticGame::new("game_b", rows, noise, vec![1, 1, 1], vec![prox; 3])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagParams {
    pub eigenvalues: Vec<f64>,
    pub theta: f64,
    pub noise_std: f64,
}

impl Default for DiagParams {
    fn default() -> Self {
        Self { eigenvalues: vec![1.0, 2.0], theta: 10.0, noise_std: 0.0 }
    }
}

/// `M̄ = diag(eigenvalues)`, one scalar agent per coordinate, normal noise on
/// each diagonal entry, exact constants `μ = min λ`, `ℓ = max λ`, `β = 1/ℓ`.
pub fn diag_game(eigenvalues: &[f64], theta: f64, noise_std: f64) -> Result<LinearStochasticGame> {
    if eigenvalues.is_empty() || eigenvalues.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidGame("diagonal game needs positive eigenvalues".into()));
    }
    if !(theta > 0.0) {
        return Err(Error::InvalidGame(format!("theta {theta} must be positive")));
    }
    let n = eigenvalues.len();
    let mut m = vec![0.0; n * n];
    for (i, &l) in eigenvalues.iter().enumerate() {
        m[i * n + i] = l;
    }
    let noise = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| NoisyEntry { row: i, col: i, model: NoiseModel::normal(l, noise_std) })
        .collect();
    let lmin = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let lmax = eigenvalues.iter().copied().fold(0.0, f64::max);
    Ok(LinearStochasticGame::new("diag", m, noise, vec![1; n], vec![ProxDescriptor::symmetric_box(1, theta)?; n])?
        .with_constants(Constants {
            strong_monotonicity: Some(lmin),
            lipschitz: Some(lmax),
            cocoercivity: Some(1.0 / lmax),
        }))
}

/// Builds a game from its JSON parameter object.
pub type GameFactory = fn(&serde_json::Value) -> Result<GameSpec>;

fn parse_params<T: DeserializeOwned + Default>(params: &serde_json::Value) -> Result<T> {
    if params.is_null() {
        return Ok(T::default());
    }
    serde_path_to_error::deserialize(params)
        .map_err(|e| Error::InvalidConfig(format!("game params: {} at `{}`", e.inner(), e.path())))
}

pub struct GameEntry {
    pub factory: GameFactory,
    pub description: &'static str,
}

/// Games selectable by name.
pub struct GameRegistry {
    entries: BTreeMap<&'static str, GameEntry>,
}

impl Default for GameRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl GameRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("game_a", "two-player comparative game with means (1, 1000)", |p| {
            game_a_verbatim(&parse_params(p)?)?.to_spec()
        });
        r.register("game_a_repaired", "two-player game with means (1, -1); strongly monotone", |p| {
            game_a_repaired(&parse_params(p)?)?.to_spec()
        });
        r.register("game_b", "three-player random positive definite game with antidiagonal noise", |p| {
            game_b(&parse_params(p)?)?.to_spec()
        });
        r.register("diag", "diagonal game with exact constants", |p| {
            let d: DiagParams = parse_params(p)?;
            diag_game(&d.eigenvalues, d.theta, d.noise_std)?.to_spec()
        });
        r
    }

    pub fn register(&mut self, name: &'static str, description: &'static str, factory: GameFactory) {
        self.entries.insert(name, GameEntry { factory, description });
    }

    pub fn build(&self, name: &str, params: &serde_json::Value) -> Result<GameSpec> {
        let entry = self.entries.get(name).ok_or_else(|| Error::UnknownGame(name.to_string()))?;
        (entry.factory)(params)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &GameEntry)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }
}
