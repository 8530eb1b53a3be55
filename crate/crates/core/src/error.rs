use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |m - m^dagger| = {deviation:.3e} exceeds tolerance {tol:.1e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:.3e} below -{tol:.1e}")]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("Jacobi sweep limit reached (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { off_norm: f64 },

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("invalid subsystem labels: {0}")]
    InvalidLabels(String),

    #[error("invalid bipartition: {0}")]
    InvalidCut(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state has support outside the truncated Dicke ladder: {0}")]
    OutsideTruncation(String),

    #[error("consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
