//! V-cycle multigrid for symmetric positive definite Toeplitz tridiagonal (1D)
//! and Kronecker block-tridiagonal (2D) systems, together with the
//! finite-difference time stepping for the backward fractional Feynman-Kac
//! equation that produces such systems.
//!
//! Module map:
//!
//! - [`stencil`]: matrix-free symmetric banded Toeplitz operators.
//! - [`transfer`]: full-weighting restriction, linear prolongation, cutting.
//! - [`coarsen`]: Galerkin stencil recursion, closed forms, rediscretization.
//! - [`vcycle`]: hierarchy, damped Jacobi, V-cycle, solver driver.
//! - [`fsd`]: fractional substantial derivative quadrature weights.
//! - [`feynman_kac`]: 1D compact and 2D centered time-stepping schemes.
//! - [`analysis`]: convergence constants and bound checks.
//! - [`cli`]: experiment runner behind the `fkmg` binary.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod coarsen;
pub mod error;
pub mod feynman_kac;
pub mod fsd;
pub mod operator;
pub mod scalar;
pub mod stencil;
pub mod tensor;
pub mod transfer;
pub mod vcycle;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scalar::Scalar;
pub use stencil::SymmetricToeplitzStencil;
pub use tensor::TensorOperator2D;
