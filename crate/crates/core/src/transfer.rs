//! Full-weighting restriction, linear prolongation and the cutting operator.
//!
//! In 1D the fine grid has `2m + 1` points when the coarse grid has `m`.
//! Fine index `2i + 1` (0-based) sits on coarse point `i`.
//!
//! 2D fields are row-major: entry `(i, j)` lives at `i * m + j`, with `i`
//! the block (outer Kronecker) index. The 2D transfers are tensor products
//! of the 1D ones, applied along rows and then along columns.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stencil::level_count;

/// Fine/coarse size pair `(2m + 1, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransferPair {
    pub fine: usize,
    pub coarse: usize,
}

impl TransferPair {
    pub fn from_fine(fine: usize) -> Result<Self> {
        if level_count(fine)? < 2 {
            return Err(Error::GridSize(fine));
        }
        Ok(Self { fine, coarse: (fine - 1) / 2 })
    }

    pub fn from_coarse(coarse: usize) -> Result<Self> {
        level_count(coarse)?;
        Ok(Self { fine: 2 * coarse + 1, coarse })
    }
}

/// `v_c[i] = (v[2i] + 2 v[2i+1] + v[2i+2]) / 4`.
pub fn restrict_1d<T: Scalar>(fine: &[T]) -> Result<Vec<T>> {
    let pair = TransferPair::from_fine(fine.len())?;
    let mut out = vec![T::zero(); pair.coarse];
    restrict_line(fine, &mut out, pair.coarse, 1, 0, 1, 0);
    Ok(out)
}

/// Coarse value copied onto its fine point, halves spread to both neighbours.
pub fn prolong_1d<T: Scalar>(coarse: &[T]) -> Result<Vec<T>> {
    let pair = TransferPair::from_coarse(coarse.len())?;
    let mut out = vec![T::zero(); pair.fine];
    prolong_line_add(coarse, &mut out, pair.coarse, 1, 0, 1, 0);
    Ok(out)
}

/// Selects `v[1], v[3], ..., v[M-2]` (the fine points shared with the coarse grid).
pub fn cut<T: Scalar>(fine: &[T]) -> Result<Vec<T>> {
    let pair = TransferPair::from_fine(fine.len())?;
    Ok((0..pair.coarse).map(|i| fine[2 * i + 1]).collect())
}

pub fn restrict_2d<T: Scalar>(fine: &[T], m_fine: usize) -> Result<Vec<T>> {
    check_square(fine.len(), m_fine)?;
    let pair = TransferPair::from_fine(m_fine)?;
    let mc = pair.coarse;
    // rows first: fine rows x coarse columns
    let mut tmp = vec![T::zero(); m_fine * mc];
    for i in 0..m_fine {
        restrict_line(fine, &mut tmp, mc, 1, i * m_fine, 1, i * mc);
    }
    let mut out = vec![T::zero(); mc * mc];
    for j in 0..mc {
        restrict_line(&tmp, &mut out, mc, mc, j, mc, j);
    }
    Ok(out)
}

pub fn prolong_2d<T: Scalar>(coarse: &[T], m_coarse: usize) -> Result<Vec<T>> {
    check_square(coarse.len(), m_coarse)?;
    let pair = TransferPair::from_coarse(m_coarse)?;
    let mut out = vec![T::zero(); pair.fine * pair.fine];
    prolong_2d_add(coarse, &mut out, m_coarse, &mut Vec::new());
    Ok(out)
}

fn check_square(len: usize, m: usize) -> Result<()> {
    if len != m * m {
        return Err(Error::Dimension { expected: m * m, got: len });
    }
    Ok(())
}

/// Restricts the fine line starting at `f_off` with stride `f_stride` into
/// the coarse line at `c_off` with stride `c_stride`.
pub(crate) fn restrict_line<T: Scalar>(
    fine: &[T],
    coarse: &mut [T],
    mc: usize,
    f_stride: usize,
    f_off: usize,
    c_stride: usize,
    c_off: usize,
) {
    for i in 0..mc {
        let a = fine[f_off + 2 * i * f_stride];
        let b = fine[f_off + (2 * i + 1) * f_stride];
        let c = fine[f_off + (2 * i + 2) * f_stride];
        coarse[c_off + i * c_stride] = (a + b * 2.0 + c) * 0.25;
    }
}

/// Adds the prolongation of a coarse line into a fine line.
pub(crate) fn prolong_line_add<T: Scalar>(
    coarse: &[T],
    fine: &mut [T],
    mc: usize,
    c_stride: usize,
    c_off: usize,
    f_stride: usize,
    f_off: usize,
) {
    for i in 0..mc {
        let v = coarse[c_off + i * c_stride];
        let half = v * 0.5;
        fine[f_off + 2 * i * f_stride] += half;
        fine[f_off + (2 * i + 1) * f_stride] += v;
        fine[f_off + (2 * i + 2) * f_stride] += half;
    }
}

/// `fine += (P (x) P) coarse`, with `scratch` reused between calls.
pub(crate) fn prolong_2d_add<T: Scalar>(coarse: &[T], fine: &mut [T], mc: usize, scratch: &mut Vec<T>) {
    let mf = 2 * mc + 1;
    scratch.clear();
    scratch.resize(mc * mf, T::zero());
    // along rows: coarse rows x fine columns
    for i in 0..mc {
        prolong_line_add(coarse, scratch, mc, 1, i * mc, 1, i * mf);
    }
    for j in 0..mf {
        prolong_line_add(scratch, fine, mc, mf, j, mf, j);
    }
}

/// Row-major 2D restriction into a preallocated buffer.
pub(crate) fn restrict_2d_into<T: Scalar>(fine: &[T], coarse: &mut [T], mf: usize, scratch: &mut Vec<T>) {
    let mc = (mf - 1) / 2;
    scratch.clear();
    scratch.resize(mf * mc, T::zero());
    for i in 0..mf {
        restrict_line(fine, scratch, mc, 1, i * mf, 1, i * mc);
    }
    for j in 0..mc {
        restrict_line(scratch, coarse, mc, mc, j, mc, j);
    }
}

/// Restriction as a dense `m x (2m + 1)` matrix.
pub fn dense_restriction(m_fine: usize) -> Result<nalgebra::DMatrix<f64>> {
    let pair = TransferPair::from_fine(m_fine)?;
    let mut r = nalgebra::DMatrix::zeros(pair.coarse, m_fine);
    for i in 0..pair.coarse {
        r[(i, 2 * i)] = 0.25;
        r[(i, 2 * i + 1)] = 0.5;
        r[(i, 2 * i + 2)] = 0.25;
    }
    Ok(r)
}

/// Prolongation as a dense `(2m + 1) x m` matrix.
pub fn dense_prolongation(m_coarse: usize) -> Result<nalgebra::DMatrix<f64>> {
    TransferPair::from_coarse(m_coarse)?;
    Ok(dense_restriction(2 * m_coarse + 1)?.transpose() * 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restriction_examples() {
        assert_eq!(restrict_1d(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0]);
        assert_eq!(restrict_1d(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap(), vec![2.0, 4.0, 6.0]);
        assert_eq!(restrict_1d(&[0.0, 1.0, 0.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn prolongation_examples() {
        assert_eq!(prolong_1d(&[1.0]).unwrap(), vec![0.5, 1.0, 0.5]);
        assert_eq!(prolong_1d(&[1.0, 1.0, 1.0]).unwrap(), vec![0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 0.5]);
        assert_eq!(prolong_1d(&[0.0; 3]).unwrap(), vec![0.0; 7]);
    }

    #[test]
    fn cut_examples() {
        assert_eq!(cut(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap(), vec![2.0, 4.0, 6.0]);
        assert_eq!(cut(&[0.0; 7]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn prolong_of_cut_reproduces_even_entries() {
        let v: Vec<f64> = (0..15).map(|i| ((i * 7 % 5) as f64) - 1.3).collect();
        let pc = prolong_1d(&cut(&v).unwrap()).unwrap();
        for (i, (a, b)) in v.iter().zip(&pc).enumerate() {
            let r = a - b;
            if i % 2 == 1 {
                assert_eq!(r, 0.0);
            } else {
                // v_{i} - (v_{i-1} + v_{i+1})/2 with zero ghosts
                let left = if i > 0 { v[i - 1] } else { 0.0 };
                let right = if i + 1 < v.len() { v[i + 1] } else { 0.0 };
                assert!((r - (v[i] - 0.5 * (left + right))).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dense_forms_match_matrix_free() {
        let r = dense_restriction(7).unwrap();
        let v: Vec<f64> = (0..7).map(|i| (i * i) as f64 - 3.0).collect();
        let got = restrict_1d(&v).unwrap();
        let want = &r * nalgebra::DVector::from_vec(v);
        assert_eq!(got, want.as_slice());
        let p = dense_prolongation(3).unwrap();
        assert_eq!(p.column(0).as_slice(), &[0.5, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn invalid_sizes() {
        assert!(matches!(restrict_1d(&[1.0; 6]), Err(Error::GridSize(6))));
        assert!(matches!(restrict_1d(&[1.0; 1]), Err(Error::GridSize(1))));
        assert!(matches!(prolong_1d(&[1.0; 2]), Err(Error::GridSize(2))));
        assert!(matches!(cut(&[1.0; 4]), Err(Error::GridSize(4))));
        assert!(matches!(restrict_2d(&[1.0; 8], 3), Err(Error::Dimension { .. })));
    }

    #[test]
    fn two_dimensional_constants_and_basis() {
        let ones = vec![1.0; 49];
        assert_eq!(restrict_2d(&ones, 7).unwrap(), vec![1.0; 9]);
        let p = prolong_2d(&[1.0], 1).unwrap();
        let w = [0.5, 1.0, 0.5];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(p[i * 3 + j], w[i] * w[j]);
            }
        }
        let ones_c = vec![1.0; 9];
        let back = restrict_2d(&prolong_2d(&ones_c, 3).unwrap(), 7).unwrap();
        // interior coarse points see all ones; edges see the halved boundary
        assert_eq!(back[4], 1.0);
    }
}
