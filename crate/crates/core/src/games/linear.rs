use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::game::{Constants, GameSpec, MeanOracle, NoisyOracle};
use crate::operators::ProxDescriptor;
use crate::profile::Partition;
use crate::sampling::{NoiseModel, RngStream, StreamRng};

/// One randomized matrix entry.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyEntry {
    pub row: usize,
    pub col: usize,
    pub model: NoiseModel,
}

/// Affine stochastic game `F(x, ξ) = M(ξ) x` with `E[M(ξ)] = M̄`.
///
/// Randomized entries are drawn independently in row-major order, so a
/// realization is a deterministic function of the generator state.
#[derive(Clone, Debug)]
pub struct LinearStochasticGame {
    name: String,
    n: usize,
    mean_matrix: Vec<f64>,
    noise: Vec<NoisyEntry>,
    sizes: Vec<usize>,
    prox_ops: Vec<ProxDescriptor>,
    constants: Option<Constants>,
}

impl LinearStochasticGame {
    /// `mean_matrix` is row-major `n × n`.
    pub fn new(
        name: impl Into<String>,
        mean_matrix: Vec<f64>,
        mut noise: Vec<NoisyEntry>,
        sizes: Vec<usize>,
        prox_ops: Vec<ProxDescriptor>,
    ) -> Result<Self> {
        let partition = Partition::new(&sizes)?;
        let n = partition.dim();
        if mean_matrix.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: mean_matrix.len() });
        }
        if mean_matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGame("mean matrix has non-finite entries".into()));
        }
        noise.sort_by_key(|e| (e.row, e.col));
        for w in noise.windows(2) {
            if (w[0].row, w[0].col) == (w[1].row, w[1].col) {
                return Err(Error::InvalidGame(format!("entry ({}, {}) randomized twice", w[0].row, w[0].col)));
            }
        }
        for e in &noise {
            if e.row >= n || e.col >= n {
                return Err(Error::InvalidGame(format!("noisy entry ({}, {}) outside {n}x{n}", e.row, e.col)));
            }
            e.model.validate()?;
            let target = mean_matrix[e.row * n + e.col];
            let m = e.model.mean();
            if (m - target).abs() > 1e-12 * target.abs().max(1.0) {
                return Err(Error::InvalidGame(format!(
                    "entry ({}, {}) has noise mean {m}, matrix mean {target}",
                    e.row, e.col
                )));
            }
        }
        Ok(Self { name: name.into(), n, mean_matrix, noise, sizes, prox_ops, constants: None })
    }

    /// Overrides the constants derived from the mean matrix.
    pub fn with_constants(mut self, constants: Constants) -> Self {
        self.constants = Some(constants);
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mean_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.mean_matrix)
    }

    pub fn noise_entries(&self) -> &[NoisyEntry] {
        &self.noise
    }

    pub fn prox_ops(&self) -> &[ProxDescriptor] {
        &self.prox_ops
    }

    /// `M̄ x`.
    pub fn apply_mean(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.kernel().mean_into(x, &mut out);
        out
    }

    /// Eigenvalues of the symmetric part `(M̄ + M̄ᵀ)/2`, ascending.
    pub fn symmetric_part_eigenvalues(&self) -> Vec<f64> {
        let m = self.mean_matrix();
        let sym = (&m + m.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn max_singular_value(&self) -> f64 {
        self.mean_matrix().singular_values().iter().copied().fold(0.0, f64::max)
    }

    /// `μ = λ_min(sym M̄)` when positive, `ℓ = σ_max(M̄)`, and `β = 1/λ_max`
    /// for symmetric `M̄` or `μ/ℓ²` otherwise.
    pub fn derived_constants(&self) -> Constants {
        if let Some(c) = self.constants {
            return c;
        }
        let ev = self.symmetric_part_eigenvalues();
        let lmin = ev[0];
        let lmax = ev[ev.len() - 1];
        let ell = self.max_singular_value();
        let m = self.mean_matrix();
        let symmetric = (&m - m.transpose()).amax() == 0.0;
        let mu = (lmin > 0.0).then_some(lmin);
        let beta = match mu {
            Some(_) if symmetric => Some(1.0 / lmax),
            Some(mu) => Some(mu / (ell * ell)),
            None => None,
        };
        Constants { strong_monotonicity: mu, lipschitz: (ell > 0.0).then_some(ell.max(mu.unwrap_or(0.0))), cocoercivity: beta }
    }

    /// `Σ var(M_rc) · max_{x∈Ω} x_c²`, available when every agent is box-constrained.
    pub fn variance_bound(&self) -> Option<f64> {
        let mut radius = vec![0.0f64; self.n];
        let partition = Partition::new(&self.sizes).ok()?;
        for (i, p) in self.prox_ops.iter().enumerate() {
            match p {
                ProxDescriptor::Box { lower, upper } => {
                    for (j, c) in partition.range(i).enumerate() {
                        radius[c] = lower[j].abs().max(upper[j].abs());
                    }
                }
                _ => return None,
            }
        }
        Some(self.noise.iter().map(|e| e.model.variance() * radius[e.col] * radius[e.col]).sum())
    }

    fn kernel(&self) -> LinearKernel {
        LinearKernel {
            n: self.n,
            mean: self.mean_matrix.clone(),
            noise: self.noise.iter().map(|e| (e.row, e.col, e.model.clone())).collect(),
        }
    }

    /// Builds the [`GameSpec`]. The origin is recorded as the solution when feasible.
    pub fn to_spec(&self) -> Result<GameSpec> {
        let kernel = Arc::new(self.kernel());
        let mut b = GameSpec::builder(self.name.clone(), &self.sizes, kernel.clone())?
            .prox_ops(self.prox_ops.clone())
            .mean_oracle(kernel)
            .constants(self.derived_constants());
        let partition = Partition::new(&self.sizes)?;
        let zero_feasible =
            self.prox_ops.iter().enumerate().all(|(i, p)| p.contains(&vec![0.0; partition.block_size(i)]));
        if zero_feasible {
            b = b.known_solution(vec![0.0; self.n]);
        }
        if let Some(s2) = self.variance_bound() {
            b = b.variance_bound(s2);
        }
        b.build()
    }
}

/// A realization is `M̄ + Δ` with `Δ` zero except at the noisy entries, so
/// `F(x, ξ) = M̄x + Δx` and a batch average needs `M̄x` only once.
struct LinearKernel {
    n: usize,
    mean: Vec<f64>,
    /// `(row, col, model)` in row-major order; this fixes the draw order.
    noise: Vec<(usize, usize, NoiseModel)>,
}

impl NoisyOracle for LinearKernel {
    fn sample_into(&self, x: &[f64], rng: &mut StreamRng, out: &mut [f64]) {
        self.mean_into(x, out);
        for (r, c, m) in &self.noise {
            out[*r] += m.deviation(rng) * x[*c];
        }
    }

    fn sample_mean_into(&self, x: &[f64], stream: RngStream, batch: u64, out: &mut [f64], _scratch: &mut [f64]) {
        if batch <= 1 {
            return self.sample_into(x, &mut stream.rng(), out);
        }
        let mut dev = vec![0.0; self.noise.len()];
        for mut rng in stream.sample_rngs(batch) {
            for (d, (_, _, m)) in dev.iter_mut().zip(&self.noise) {
                *d += m.deviation(&mut rng);
            }
        }
        self.mean_into(x, out);
        let s = batch as f64;
        for (d, (r, c, _)) in dev.iter().zip(&self.noise) {
            out[*r] += (d / s) * x[*c];
        }
    }
}

impl MeanOracle for LinearKernel {
    fn mean_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for r in 0..n {
            let mut acc = 0.0;
            for c in 0..n {
                acc += self.mean[r * n + c] * x[c];
            }
            out[r] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_biased_noise() {
        let err = LinearStochasticGame::new(
            "bad",
            vec![1.0, 0.0, 0.0, 1.0],
            vec![NoisyEntry { row: 0, col: 1, model: NoiseModel::normal(0.5, 1.0) }],
            vec![1, 1],
            vec![ProxDescriptor::Identity; 2],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidGame(_)));
    }

    #[test]
    fn rejects_duplicate_entries() {
        let e = NoisyEntry { row: 0, col: 0, model: NoiseModel::normal(1.0, 1.0) };
        assert!(LinearStochasticGame::new(
            "dup",
            vec![1.0, 0.0, 0.0, 1.0],
            vec![e.clone(), e],
            vec![2],
            vec![ProxDescriptor::Identity],
        )
        .is_err());
    }
}
