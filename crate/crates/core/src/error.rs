use thiserror::Error;

use crate::vcycle::SolveReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("grid size {0} is not of the form 2^k - 1")]
    GridSize(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("level {level} (size {size}): operator is not SPD-eligible: {detail}")]
    NotSpd { level: usize, size: usize, detail: String },

    /// a_0 = 2 a_1 with a_1 > 0: the symbol vanishes at pi, where the
    /// [1 2 1] prolongation symbol also vanishes, so the approximation
    /// property cannot hold with these transfers.
    #[error(
        "degenerate stencil (a0 = {a0}, a1 = {a1}): a0 = 2*a1 puts a zero of the symbol at pi; \
         full-weighting [1 2 1] transfers are unusable here, only [-1 2 -1] would be"
    )]
    DegenerateSymbol { a0: f64, a1: f64 },

    #[error("eigenvalue estimate did not converge after {iterations} iterations (last estimate {estimate})")]
    Estimation { estimate: f64, iterations: usize },

    #[error(
        "multigrid did not converge: {} iterations, final relative residual {:.3e}",
        .0.iterations,
        .0.final_relative_residual()
    )]
    NonConvergence(Box<SolveReport>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
