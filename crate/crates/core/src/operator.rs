//! Level operators: a 1D stencil or a 2D Kronecker sum.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::scalar::Scalar;
use crate::stencil::{lambda_max_symmetric, EigenEstimate, SymmetricToeplitzStencil};
use crate::tensor::TensorOperator2D;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LevelOperator {
    Line(SymmetricToeplitzStencil),
    Plane(TensorOperator2D),
}

impl LevelOperator {
    /// Spatial dimension, 1 or 2.
    pub fn dimension(&self) -> usize {
        match self {
            Self::Line(_) => 1,
            Self::Plane(_) => 2,
        }
    }

    /// Unknown count on a grid with `m` points per direction.
    pub fn unknowns(&self, m: usize) -> usize {
        match self {
            Self::Line(_) => m,
            Self::Plane(_) => m * m,
        }
    }

    pub fn diagonal(&self) -> f64 {
        match self {
            Self::Line(s) => s.diagonal(),
            Self::Plane(t) => t.diagonal(),
        }
    }

    pub fn is_spd_eligible(&self) -> bool {
        match self {
            Self::Line(s) => s.is_spd_eligible(),
            Self::Plane(t) => t.is_spd_eligible(),
        }
    }

    pub fn gershgorin_bound(&self) -> f64 {
        match self {
            Self::Line(s) => s.gershgorin_bound(),
            Self::Plane(t) => t.gershgorin_bound(),
        }
    }

    pub fn apply<T: Scalar>(&self, v: &[T], m: usize) -> Result<Vec<T>> {
        check_len(self.unknowns(m), v.len())?;
        let mut out = vec![T::zero(); v.len()];
        let mut scratch = Vec::new();
        self.apply_into(v, &mut out, m, &mut scratch);
        Ok(out)
    }

    /// `out = A v`; `scratch` is resized as needed.
    pub(crate) fn apply_into<T: Scalar>(&self, v: &[T], out: &mut [T], m: usize, scratch: &mut Vec<T>) {
        match self {
            Self::Line(s) => s.apply_strided(v, out, m, 1, 0),
            Self::Plane(t) => {
                scratch.resize(2 * m * m, T::zero());
                t.apply_into(v, out, m, scratch);
            }
        }
    }

    pub fn to_dense(&self, m: usize) -> nalgebra::DMatrix<f64> {
        match self {
            Self::Line(s) => s.to_dense(m),
            Self::Plane(t) => t.to_dense(m),
        }
    }

    /// Largest eigenvalue of `D^{-1} A` (constant diagonal `D`).
    pub fn jacobi_lambda_max(&self, m: usize, tol: f64) -> Result<EigenEstimate> {
        let d = self.diagonal();
        let n = self.unknowns(m);
        let mut scratch = Vec::new();
        let mut est = lambda_max_symmetric(n, tol, |x, y| self.apply_into(x, y, m, &mut scratch))?;
        est.lambda_max /= d;
        est.gershgorin = self.gershgorin_bound() / d;
        Ok(est)
    }
}
