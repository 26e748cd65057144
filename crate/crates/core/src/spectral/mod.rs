//! Principal eigenpairs of Metzler matrices and the threshold quantities
//! built on them: `λ_p`, `R0`, `r(K_λ)`, the critical length and the
//! susceptible/infected block operator.

mod block;
mod eigen;
mod threshold;

use thiserror::Error;

use crate::discretization::DiscretizationError;

pub use block::{block_spectral_bound, effective_bound, effective_operator, BlockOperator};
pub use eigen::{dense_spectral_bound, lambda_p, principal_eigenpair, EigenOptions, EigenResult};
pub use threshold::{
    BisectionTolerances, CriticalLength, NextGeneration, R0Result, SymmetricIntervalProblem,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error("matrix must be square and nonempty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Metzler: entry ({row}, {col}) = {value}")]
    NotMetzler { row: usize, col: usize, value: f64 },
    #[error("eigen iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(
        "matrix appears reducible: its coupling graph is not strongly connected (spectral bound {lambda})"
    )]
    ReducibleSuspected { lambda: f64 },
    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("incidence slope must be >= 0, got {0}")]
    NegativeIncidence(f64),
    #[error("V is not invertible with a positive inverse: s(A_I) = {bound:e} >= -1e-10")]
    SingularV { bound: f64 },
    #[error("shift {lambda} does not exceed s(A_I) = {bound}")]
    SingularShift { lambda: f64, bound: f64 },
    #[error("invalid bracket: {0}")]
    BracketInvalid(String),
    #[error("susceptible block is not stable: s(A_s) = {bound}")]
    UnstableAs { bound: f64 },
}
