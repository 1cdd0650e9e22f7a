//! Symmetric banded Toeplitz operators stored as stencils.
//!
//! A stencil `(a_0, a_1, ..., a_b)` stands for the `M x M` matrix with
//! entries `a_{|i-j|}` (zero beyond the half-bandwidth `b`). Every operator
//! in the multigrid hierarchy, fine or coarse, stays in this form; the dense
//! matrix is only materialized for test oracles.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::scalar::{dot, Scalar};

/// Iteration cap for [`lambda_max_symmetric`].
pub const EIGEN_MAX_ITERATIONS: usize = 10_000;
/// Default relative tolerance for eigenvalue estimates.
pub const EIGEN_DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricToeplitzStencil {
    bands: Vec<f64>,
}

impl SymmetricToeplitzStencil {
    pub fn new(bands: Vec<f64>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidParameter("stencil needs at least a_0".into()));
        }
        if bands.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite stencil band in {bands:?}")));
        }
        Ok(Self { bands })
    }

    pub fn tridiagonal(a0: f64, a1: f64) -> Self {
        Self { bands: vec![a0, a1] }
    }

    pub fn identity() -> Self {
        Self { bands: vec![1.0] }
    }

    /// `tridiag(-1, 2, -1)`.
    pub fn laplacian() -> Self {
        Self::tridiagonal(2.0, -1.0)
    }

    /// `(1/12) tridiag(1, 10, 1)`, the fourth-order compact mass operator.
    pub fn compact_mass() -> Self {
        Self::tridiagonal(10.0 / 12.0, 1.0 / 12.0)
    }

    pub fn bands(&self) -> &[f64] {
        &self.bands
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    /// Band `a_j`; zero beyond the half-bandwidth.
    pub fn band(&self, j: usize) -> f64 {
        self.bands.get(j).copied().unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> f64 {
        self.bands[0]
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.bands.len() <= 2
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { bands: self.bands.iter().map(|b| b * c).collect() }
    }

    /// `a * self + b * other`.
    pub fn combine(a: f64, lhs: &Self, b: f64, rhs: &Self) -> Self {
        let n = lhs.bands.len().max(rhs.bands.len());
        let bands = (0..n).map(|j| a * lhs.band(j) + b * rhs.band(j)).collect();
        Self { bands }
    }

    /// Drops trailing zero bands, keeping at least `a_0`.
    pub fn trimmed(mut self) -> Self {
        while self.bands.len() > 1 && *self.bands.last().unwrap() == 0.0 {
            self.bands.pop();
        }
        self
    }

    /// Upper bound `a_0 + 2 sum_{j>=1} |a_j|` on every eigenvalue.
    pub fn gershgorin_bound(&self) -> f64 {
        self.bands[0] + 2.0 * self.off_diagonal_sum()
    }

    fn off_diagonal_sum(&self) -> f64 {
        self.bands[1..].iter().map(|b| b.abs()).sum()
    }

    /// `a_0 > 0` and `a_0 >= 2 sum_{j>=1} |a_j|`. For tridiagonal stencils this
    /// is exactly `a_0 >= 2|a_1|`.
    pub fn is_spd_eligible(&self) -> bool {
        let a0 = self.bands[0];
        a0 > 0.0 && a0 >= 2.0 * self.off_diagonal_sum() * (1.0 - 4.0 * f64::EPSILON)
    }

    /// Matrix-free product with Dirichlet truncation at both ends.
    pub fn apply<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        if v.is_empty() {
            return Err(Error::Dimension { expected: 1, got: 0 });
        }
        let mut out = vec![T::zero(); v.len()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn apply_into<T: Scalar>(&self, v: &[T], out: &mut [T]) -> Result<()> {
        check_len(v.len(), out.len())?;
        self.apply_strided(v, out, v.len(), 1, 0);
        Ok(())
    }

    /// Applies the stencil to the line `v[offset + i*stride]`, `i < m`,
    /// writing the same positions of `out`. Used for rows and columns of
    /// row-major 2D fields.
    pub(crate) fn apply_strided<T: Scalar>(&self, v: &[T], out: &mut [T], m: usize, stride: usize, offset: usize) {
        let b = self.half_bandwidth();
        let a0 = self.bands[0];
        for i in 0..m {
            let mut acc = v[offset + i * stride] * a0;
            for j in 1..=b.min(m.saturating_sub(1)) {
                let aj = self.bands[j];
                if i >= j {
                    acc += v[offset + (i - j) * stride] * aj;
                }
                if i + j < m {
                    acc += v[offset + (i + j) * stride] * aj;
                }
            }
            out[offset + i * stride] = acc;
        }
    }

    pub fn to_dense(&self, m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, m, |i, j| self.band(i.abs_diff(j)))
    }

    /// Largest eigenvalue of the `m x m` truncation, plus the Gershgorin bound.
    pub fn lambda_max_estimate(&self, m: usize, tol: f64) -> Result<EigenEstimate> {
        if m == 0 {
            return Err(Error::Dimension { expected: 1, got: 0 });
        }
        let gershgorin = self.gershgorin_bound();
        let mut est = lambda_max_symmetric(m, tol, |x, y| self.apply_strided(x, y, m, 1, 0))?;
        est.gershgorin = gershgorin;
        Ok(est)
    }
}

/// Grid level `k` of a nested dyadic family: `2^k - 1` interior points with
/// spacing `b / 2^k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLevel {
    pub k: usize,
    pub size: usize,
    pub spacing: f64,
}

impl GridLevel {
    pub fn new(k: usize, domain_length: f64) -> Result<Self> {
        if k == 0 || k > 30 {
            return Err(Error::InvalidParameter(format!("level index {k} out of range 1..=30")));
        }
        Ok(Self { k, size: (1 << k) - 1, spacing: domain_length / (1u64 << k) as f64 })
    }

    /// The coarser level `k - 1`, if any.
    pub fn coarser(&self) -> Option<Self> {
        (self.k > 1).then(|| Self { k: self.k - 1, size: (self.size - 1) / 2, spacing: self.spacing * 2.0 })
    }
}

/// Number of levels `K` for a grid of `m = 2^K - 1` points.
pub fn level_count(m: usize) -> Result<usize> {
    let p = m.wrapping_add(1);
    if m == 0 || !p.is_power_of_two() {
        return Err(Error::GridSize(m));
    }
    Ok(p.trailing_zeros() as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    pub lambda_max: f64,
    /// Gershgorin upper bound (infinite when the caller supplied none).
    pub gershgorin: f64,
    pub iterations: usize,
}

/// Largest eigenvalue of a symmetric operator of size `n` given as a
/// matvec closure.
///
/// Lanczos with full reorthogonalization from a fixed pseudo-random start.
/// The Ritz value is a Rayleigh quotient over the Krylov space, so it never
/// exceeds the true maximum and it dominates the plain power-iteration
/// estimate after the same number of products. Stops when the Ritz value
/// changes by less than `tol` (relative) over one step, or when the Krylov
/// space is exhausted.
pub fn lambda_max_symmetric<F>(n: usize, tol: f64, mut op: F) -> Result<EigenEstimate>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nrm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= nrm);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut prev = f64::NAN;
    let cap = EIGEN_MAX_ITERATIONS.min(n);

    for it in 1..=cap {
        op(&q, &mut w);
        let a = dot(&q, &w);
        basis.push(q.clone());
        alphas.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for u in &basis {
                let c = dot(u, &w);
                w.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        let ritz = tridiagonal_max_eigenvalue(&alphas, &betas);
        let beta = dot(&w, &w).sqrt();
        let scale = ritz.abs().max(f64::MIN_POSITIVE);
        let converged = (ritz - prev).abs() <= tol * scale;
        if converged || beta <= 1e-14 * scale || it == cap {
            if converged || beta <= 1e-14 * scale || it == n {
                return Ok(EigenEstimate { lambda_max: ritz, gershgorin: f64::INFINITY, iterations: it });
            }
            return Err(Error::Estimation { estimate: ritz, iterations: it });
        }
        prev = ritz;
        betas.push(beta);
        q.iter_mut().zip(&w).for_each(|(x, y)| *x = y / beta);
    }
    unreachable!("loop returns at the cap")
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, by Sturm-sequence bisection.
fn tridiagonal_max_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = beta.get(i).map_or(0.0, |b| b.abs()) + if i > 0 { beta[i - 1].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    // count of eigenvalues strictly below x
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = f64::EPSILON * (x.abs() + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
