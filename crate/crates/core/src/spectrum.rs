//! Ground-state energies: matrix-free Lanczos with a dense cross-check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::{apply_sum_into, MAX_STATE_QUBITS};
use crate::pauli::PauliSum;
use crate::rng::seeded_rng;

pub use crate::dense::dense_ground_state_energy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    pub max_iterations: usize,
    /// Stop once the residual norm of the lowest Ritz pair falls below this.
    /// It bounds the eigenvalue error.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self { max_iterations: 500, tolerance: 1e-9, seed: 0x5eed_1a2c }
    }
}

/// Lowest eigenvalue of the tridiagonal matrix and the last component of its
/// eigenvector.
fn lowest_ritz(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let i = eig.eigenvalues.imin();
    (eig.eigenvalues[i], eig.eigenvectors[(m - 1, i)])
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// Lowest eigenvalue of `h` with the default Lanczos settings.
pub fn ground_state_energy(h: &PauliSum) -> Result<f64> {
    lanczos_ground_state(h, &LanczosConfig::default())
}

/// Lanczos with full reorthogonalization. Fails with
/// [`Error::NoConvergence`] instead of returning an unconverged value.
pub fn lanczos_ground_state(h: &PauliSum, cfg: &LanczosConfig) -> Result<f64> {
    let n = h.num_qubits();
    if n > MAX_STATE_QUBITS {
        return Err(Error::TooManyQubits { requested: n, max: MAX_STATE_QUBITS });
    }
    let dim = 1usize << n;
    let mut rng = seeded_rng(cfg.seed);
    let mut q: Vec<Complex64> =
        (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let q_norm = norm(&q);
    q.iter_mut().for_each(|v| *v /= q_norm);

    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut residual = f64::INFINITY;

    for iteration in 0..cfg.max_iterations.min(dim) {
        let current = &basis[iteration];
        apply_sum_into(h, current, &mut w);
        let a = dot(current, &w).re;
        alpha.push(a);
        // Full reorthogonalization (twice, for stability).
        for _ in 0..2 {
            for v in &basis {
                let overlap = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= overlap * vi);
            }
        }
        let (ritz, last) = lowest_ritz(&alpha, &beta);
        let b = norm(&w);
        residual = (b * last).abs();
        if residual < cfg.tolerance || b < 1e-12 || iteration + 1 == dim {
            return Ok(ritz);
        }
        beta.push(b);
        basis.push(w.iter().map(|v| v / b).collect());
    }
    Err(Error::NoConvergence { iterations: cfg.max_iterations, residual })
}
