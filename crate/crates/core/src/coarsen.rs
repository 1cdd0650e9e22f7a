//! Coarse-grid operators.
//!
//! With restriction `R = L/4` and prolongation `P = L^T/2`, where `L` is the
//! `[1 2 1]` weighting, the Galerkin product `R A P = (1/8) L A L^T` of a
//! symmetric Toeplitz matrix is again symmetric Toeplitz. Its bands follow
//! from the five-point recursion
//!
//! ```text
//! a'_0 = (6 a_0 + 8 a_1 + 2 a_2) / 8
//! a'_j = (a_{2j-2} + 4 a_{2j-1} + 6 a_{2j} + 4 a_{2j+1} + a_{2j+2}) / 8,  j >= 1
//! ```
//!
//! which is what [`galerkin_step`] evaluates. [`closed_form_tridiag`] and
//! [`closed_form_coeffs`] give the same result after `k - 1` steps without
//! iterating, and serve as cross-checks.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::LevelOperator;
use crate::stencil::SymmetricToeplitzStencil;
use crate::tensor::TensorOperator2D;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CoarseningStrategy {
    /// `A_{k-1} = R A_k P`.
    Galerkin,
    /// Re-assemble the fine discretization with doubled spacing.
    Geometric(RediscretizationRule),
}

impl CoarseningStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Galerkin => "galerkin",
            Self::Geometric(_) => "geometric",
        }
    }
}

/// The two discretization families that can be rebuilt on coarser grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemFamily {
    /// `l0 H + mu_h L` with `H = tridiag(1, 10, 1)/12`.
    Compact1D,
    /// `l0 I (x) I + mu_h (I (x) L + L (x) I)`.
    Centered2D,
}

/// Level operator as a function of grid spacing:
/// `mass * M + (diffusion / h^2) * K`, where `diffusion = kappa * tau^alpha`.
/// `fine_spacing` is the spacing of the finest level of a hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RediscretizationRule {
    pub family: ProblemFamily,
    pub mass: f64,
    pub diffusion: f64,
    pub fine_spacing: f64,
}

impl RediscretizationRule {
    pub fn mu(&self, spacing: f64) -> f64 {
        self.diffusion / (spacing * spacing)
    }

    pub fn operator_at(&self, spacing: f64) -> LevelOperator {
        let mu = self.mu(spacing);
        match self.family {
            ProblemFamily::Compact1D => LevelOperator::Line(SymmetricToeplitzStencil::combine(
                self.mass,
                &SymmetricToeplitzStencil::compact_mass(),
                mu,
                &SymmetricToeplitzStencil::laplacian(),
            )),
            ProblemFamily::Centered2D => LevelOperator::Plane(TensorOperator2D::laplacian_model(self.mass, mu)),
        }
    }
}

/// Operator on the grid with spacing `2h`, given the rule and fine spacing `h`.
pub fn geometric_step(rule: &RediscretizationRule, spacing: f64) -> LevelOperator {
    rule.operator_at(2.0 * spacing)
}

/// One Galerkin coarsening of a symmetric Toeplitz stencil.
pub fn galerkin_step(fine: &SymmetricToeplitzStencil) -> SymmetricToeplitzStencil {
    let a = |j: usize| fine.band(j);
    let b = fine.half_bandwidth();
    let coarse_b = b / 2 + 1;
    let mut bands = Vec::with_capacity(coarse_b + 1);
    bands.push((6.0 * a(0) + 8.0 * a(1) + 2.0 * a(2)) / 8.0);
    for j in 1..=coarse_b {
        let v = a(2 * j - 2) + 4.0 * a(2 * j - 1) + 6.0 * a(2 * j) + 4.0 * a(2 * j + 1) + a(2 * j + 2);
        bands.push(v / 8.0);
    }
    SymmetricToeplitzStencil::new(bands).expect("coarse bands are finite when fine bands are").trimmed()
}

/// Galerkin coarsening of every Kronecker factor.
pub fn galerkin_step_2d(fine: &TensorOperator2D) -> TensorOperator2D {
    fine.map_factors(galerkin_step)
}

/// Rejects tridiagonal inputs with `a_0 = 2 a_1 > 0`.
pub fn check_galerkin_input(stencil: &SymmetricToeplitzStencil) -> Result<()> {
    if stencil.is_tridiagonal() {
        let (a0, a1) = (stencil.band(0), stencil.band(1));
        if a1 > 0.0 && (a0 - 2.0 * a1).abs() <= 1e-12 * a0.abs() {
            return Err(Error::DegenerateSymbol { a0, a1 });
        }
    }
    Ok(())
}

/// `C_k = 2^{k-2} (2^{2k-2} - 1) / 3`, so `C_1 = 0`, `C_2 = 1`, `C_3 = 10`.
pub fn c_k(k: u32) -> f64 {
    if k <= 40 {
        return c_k_exact(k) as f64;
    }
    2f64.powi(k as i32 - 2) * (4f64.powi(k as i32 - 1) - 1.0) / 3.0
}

fn c_k_exact(k: u32) -> i128 {
    assert!((1..=40).contains(&k), "level index {k} outside 1..=40");
    // 2^{k-2} (4^{k-1} - 1) / 3 = 2^{k-1} (4^{k-1} - 1) / 6
    let p = 1i128 << (k - 1);
    p * ((1i128 << (2 * (k - 1))) - 1) / 6
}

/// `C_k` and the `theta` weights of the level-`k` identity and Laplacian
/// Galerkin iterates: `I^{(k)} = theta1 I + theta3 Ltilde`, `L^{(k)} = theta2 L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormConstants {
    pub k: u32,
    pub c_k: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl ClosedFormConstants {
    pub fn new(k: u32) -> Self {
        let c = c_k(k);
        let half = 2f64.powi(k as i32 - 1);
        let eight = 8f64.powi(k as i32 - 1);
        Self { k, c_k: c, theta1: (2.0 * c + half) / eight, theta2: half / eight, theta3: c / eight }
    }
}

/// Level-`k` Galerkin iterate of `tridiag(a1, a0, a1)` (`k = 1` is the input).
pub fn closed_form_tridiag(a0: f64, a1: f64, k: u32) -> SymmetricToeplitzStencil {
    let c = c_k(k);
    let half = 2f64.powi(k as i32 - 1);
    let eight = 8f64.powi(k as i32 - 1);
    let b0 = ((4.0 * c + half) * a0 + 8.0 * c * a1) / eight;
    let b1 = (c * a0 + (2.0 * c + half) * a1) / eight;
    SymmetricToeplitzStencil::tridiagonal(b0, b1)
}

/// Integer coefficients expressing the bands of the unscaled level-`k`
/// iterate `L^{k-1} A (L^T)^{k-1}` in terms of the fine bands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GalerkinCoefficientTable {
    k: u32,
    c: i128,
    h: i128,
}

/// Coefficient table for level `k >= 2`.
pub fn closed_form_coeffs(k: u32) -> Result<GalerkinCoefficientTable> {
    if !(2..=40).contains(&k) {
        return Err(Error::Domain(format!("coefficient tables need 2 <= k <= 40, got k = {k}")));
    }
    Ok(GalerkinCoefficientTable { k, c: c_k_exact(k), h: 1i128 << (k - 1) })
}

fn cube3(n: i128) -> i128 {
    // (n - 1) n (n + 1), divisible by 6
    (n - 1) * n * (n + 1)
}

impl GalerkinCoefficientTable {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Range of fine band indices `m` with a (possibly) nonzero coefficient
    /// in band `j`.
    pub fn range(&self, j: usize) -> RangeInclusive<usize> {
        let h = self.h as usize;
        match j {
            0 => 0..=2 * h - 1,
            1 => 0..=3 * h - 1,
            _ => (j - 2) * h..=(j + 2) * h - 1,
        }
    }

    /// Coefficient of `a_m^{(1)}` in `a_j^{(k)}` (unscaled by `8^{k-1}`).
    pub fn coefficient(&self, j: usize, m: usize) -> i128 {
        if !self.range(j).contains(&m) {
            return 0;
        }
        let (c, h) = (self.c, self.h);
        let two_h = 2 * h;
        let m = m as i128;
        match j {
            0 => {
                if m == 0 {
                    4 * c + h
                } else if m <= h {
                    8 * c - (m * m - 1) * (two_h - m)
                } else {
                    let n = two_h - m;
                    cube3(n) / 3
                }
            }
            1 => {
                if m == 0 {
                    c
                } else if m <= h {
                    2 * c + m * m * h - 2 * cube3(m) / 3
                } else if m <= 2 * h {
                    let n = two_h - m;
                    let t = m - h;
                    2 * c + n * n * h - 2 * cube3(n) / 3 - cube3(t) / 6
                } else {
                    cube3(3 * h - m) / 6
                }
            }
            _ => {
                let j = j as i128;
                if m <= (j - 1) * h {
                    cube3(m - (j - 2) * h) / 6
                } else if m <= j * h {
                    let t = m - (j - 1) * h;
                    let u = j * h - m;
                    2 * c + t * t * h - cube3(u) / 6 - 2 * cube3(t) / 3
                } else if m <= (j + 1) * h {
                    let t = m - j * h;
                    let u = (j + 1) * h - m;
                    2 * c + u * u * h - cube3(t) / 6 - 2 * cube3(u) / 3
                } else {
                    cube3((j + 2) * h - m) / 6
                }
            }
        }
    }

    /// Unscaled band `j` of the level-`k` iterate of the given fine bands.
    pub fn evaluate(&self, fine_bands: &[f64], j: usize) -> f64 {
        self.range(j).filter(|&m| m < fine_bands.len()).map(|m| self.coefficient(j, m) as f64 * fine_bands[m]).sum()
    }

    /// Level-`k` stencil (scaled by `8^{1-k}`) of the given fine bands.
    pub fn coarse_stencil(&self, fine_bands: &[f64]) -> SymmetricToeplitzStencil {
        let scale = 8f64.powi(self.k as i32 - 1);
        let b = fine_bands.len().saturating_sub(1);
        // band j depends on m >= (j - 2) 2^{k-1}
        let max_j = b / self.h as usize + 2;
        let bands = (0..=max_j).map(|j| self.evaluate(fine_bands, j) / scale).collect();
        SymmetricToeplitzStencil::new(bands).expect("finite bands").trimmed()
    }
}
