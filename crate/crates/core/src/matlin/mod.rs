//! Dense linear algebra used by the trainer: matrix type, Cholesky and LU
//! solves, real Schur decomposition and a Bartels–Stewart Sylvester solver.
//!
//! Everything here is `f64` and deterministic: the same input always yields
//! bit-identical output.

mod cholesky;
mod lu;
mod matrix;
mod schur;
mod sylvester;

pub use cholesky::{solve_spd, Cholesky};
pub use lu::Lu;
pub use matrix::{dot, norm2, Matrix};
pub use schur::{real_schur, SchurForm, SchurOptions, DEFLATION_TOL};
pub use sylvester::{solve_sylvester, solve_sylvester_with, sylvester_residual, SylvesterOptions};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("{op}: dimension mismatch ({}x{} vs {}x{})", left.0, left.1, right.0, right.1)]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{rows}x{cols} matrix needs {} entries, got {len}", rows * cols)]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("{op}: matrix must be square, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("{op}: non-finite entry at ({row}, {col})")]
    NonFinite {
        op: &'static str,
        row: usize,
        col: usize,
    },
    #[error("{op}: intermediate result overflowed")]
    Overflow { op: &'static str },
    #[error("Schur iteration did not converge within {iters} iterations (raise max_iters)")]
    NoConvergence { iters: usize },
    #[error(
        "singular Sylvester pencil: eigenvalue sum {gap:.3e} below threshold {threshold:.3e}; \
         the equation has no unique solution (add jitter or change lambda)"
    )]
    SingularPencil { gap: f64, threshold: f64 },
    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is singular to working precision (pivot {pivot})")]
    Singular { pivot: usize },
}

impl LinalgError {
    pub(crate) fn dims(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        LinalgError::DimensionMismatch { op, left, right }
    }

    pub(crate) fn require_square(op: &'static str, m: &Matrix) -> Result<(), Self> {
        if m.is_square() {
            Ok(())
        } else {
            Err(LinalgError::NotSquare {
                op,
                rows: m.rows(),
                cols: m.cols(),
            })
        }
    }
}
