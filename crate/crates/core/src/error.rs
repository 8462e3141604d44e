use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator family is empty")]
    EmptyFamily,

    #[error("operator family is linearly dependent")]
    LinearlyDependent,

    #[error("invalid process: {0}")]
    InvalidProcess(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension {dim} exceeds limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
