use thiserror::Error;

use crate::solver::Solution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max |m_ij - conj(m_ji)| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (||U^H U - I||_F = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    NotUnitTrace { trace: f64 },

    #[error("matrix has negative eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("density matrix is degenerate (smallest eigenvalue {min_eigenvalue:e})")]
    Degenerate { min_eigenvalue: f64 },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EighNoConvergence { sweeps: usize, off_norm: f64 },

    /// The dual minimization hit its iteration cap. The last iterate is kept.
    #[error("solver did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
        partial: Box<Solution>,
    },

    #[error("density matrix does not match the ensemble average (||diff||_F = {deviation:e})")]
    MismatchedState { deviation: f64 },

    #[error("mean {mean} is outside the open interval ({min}, {max})")]
    InfeasibleMean { mean: f64, min: f64, max: f64 },

    #[error("all face values are equal")]
    DegenerateValues,

    #[error("need at least {required} values, got {got}")]
    TooFewValues { required: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
