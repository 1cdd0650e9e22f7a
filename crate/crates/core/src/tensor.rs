//! Sums of Kronecker products of 1D stencils acting on row-major 2D fields.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::scalar::Scalar;
use crate::stencil::SymmetricToeplitzStencil;

/// One term `coeff * (outer (x) inner)`. `outer` acts on the block (row)
/// index, `inner` within each block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KroneckerTerm {
    pub coeff: f64,
    pub outer: SymmetricToeplitzStencil,
    pub inner: SymmetricToeplitzStencil,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorOperator2D {
    terms: Vec<KroneckerTerm>,
}

impl TensorOperator2D {
    pub fn new(terms: Vec<KroneckerTerm>) -> Self {
        Self { terms }
    }

    /// `c1 (I1 (x) I1) + c2 (I1 (x) L1 + L1 (x) I1)` from a "mass" stencil
    /// `I1` and a "stiffness" stencil `L1`.
    pub fn model(c1: f64, c2: f64, mass: &SymmetricToeplitzStencil, stiffness: &SymmetricToeplitzStencil) -> Self {
        Self::new(vec![
            KroneckerTerm { coeff: c1, outer: mass.clone(), inner: mass.clone() },
            KroneckerTerm { coeff: c2, outer: mass.clone(), inner: stiffness.clone() },
            KroneckerTerm { coeff: c2, outer: stiffness.clone(), inner: mass.clone() },
        ])
    }

    /// `c1 I (x) I + c2 (I (x) L + L (x) I)` with the plain identity and
    /// Laplacian.
    pub fn laplacian_model(c1: f64, c2: f64) -> Self {
        Self::model(c1, c2, &SymmetricToeplitzStencil::identity(), &SymmetricToeplitzStencil::laplacian())
    }

    pub fn terms(&self) -> &[KroneckerTerm] {
        &self.terms
    }

    /// `(c1, c2, mass, stiffness)` when the operator has the three-term model form.
    pub fn as_model(&self) -> Option<(f64, f64, &SymmetricToeplitzStencil, &SymmetricToeplitzStencil)> {
        match self.terms.as_slice() {
            [a, b, c]
                if a.outer == a.inner
                    && b.outer == a.outer
                    && c.inner == a.outer
                    && b.inner == c.outer
                    && b.coeff == c.coeff =>
            {
                Some((a.coeff, b.coeff, &a.outer, &b.inner))
            }
            _ => None,
        }
    }

    pub fn diagonal(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff * t.outer.diagonal() * t.inner.diagonal()).sum()
    }

    /// Gershgorin upper bound on the spectrum.
    pub fn gershgorin_bound(&self) -> f64 {
        self.diagonal() + self.off_diagonal_bound()
    }

    fn off_diagonal_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let row = |s: &SymmetricToeplitzStencil| s.gershgorin_bound() - s.diagonal() + s.diagonal().abs();
                t.coeff.abs() * (row(&t.outer) * row(&t.inner) - (t.outer.diagonal() * t.inner.diagonal()).abs())
            })
            .sum()
    }

    /// Sufficient SPD test: either the assembled matrix is diagonally
    /// dominant with positive diagonal, or every factor is SPD-eligible and
    /// the coefficients are non-negative with one of them positive (a sum
    /// of Kronecker products of SPD matrices). Galerkin coarse levels pass
    /// only the second test.
    pub fn is_spd_eligible(&self) -> bool {
        let d = self.diagonal();
        if d > 0.0 && d >= self.off_diagonal_bound() * (1.0 - 8.0 * f64::EPSILON) {
            return true;
        }
        self.terms.iter().all(|t| t.coeff >= 0.0 && t.outer.is_spd_eligible() && t.inner.is_spd_eligible())
            && self.terms.iter().any(|t| t.coeff > 0.0)
    }

    pub fn apply<T: Scalar>(&self, v: &[T], m: usize) -> Result<Vec<T>> {
        check_len(m * m, v.len())?;
        let mut out = vec![T::zero(); m * m];
        let mut scratch = vec![T::zero(); 2 * m * m];
        self.apply_into(v, &mut out, m, &mut scratch);
        Ok(out)
    }

    /// `out = A v` on an `m x m` field; `scratch` must hold `2 m^2` entries.
    pub(crate) fn apply_into<T: Scalar>(&self, v: &[T], out: &mut [T], m: usize, scratch: &mut [T]) {
        let n = m * m;
        out[..n].iter_mut().for_each(|x| *x = T::zero());
        let (tmp, tmp2) = scratch.split_at_mut(n);
        for t in &self.terms {
            if t.coeff == 0.0 {
                continue;
            }
            // inner stencil along each row
            for i in 0..m {
                t.inner.apply_strided(v, tmp, m, 1, i * m);
            }
            // outer stencil along each column
            for j in 0..m {
                t.outer.apply_strided(tmp, tmp2, m, m, j);
            }
            for (o, x) in out.iter_mut().zip(tmp2.iter()) {
                *o += *x * t.coeff;
            }
        }
    }

    pub fn to_dense(&self, m: usize) -> nalgebra::DMatrix<f64> {
        let mut a = nalgebra::DMatrix::zeros(m * m, m * m);
        for t in &self.terms {
            a += t.outer.to_dense(m).kronecker(&t.inner.to_dense(m)) * t.coeff;
        }
        a
    }

    pub fn map_factors<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&SymmetricToeplitzStencil) -> SymmetricToeplitzStencil,
    {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| KroneckerTerm { coeff: t.coeff, outer: f(&t.outer), inner: f(&t.inner) })
                .collect(),
        }
    }
}
