use gnc_core::Error;
use thiserror::Error as ThisError;

/// Process exit codes shared by every command.
pub mod exit {
    pub const CLASSICAL: i32 = 0;
    pub const NONCLASSICAL: i32 = 1;
    pub const INCONCLUSIVE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const INVARIANT: i32 = 4;
    pub const DIMENSION_LIMIT: i32 = 5;
    pub const NUMERICAL: i32 = 6;

    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const WRONG_THEOREM: i32 = 3;
}

#[derive(Debug, ThisError, Clone, PartialEq)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(exit::PARSE, message)
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self::new(exit::INVARIANT, message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::NotSquare { .. } | Error::DimensionMismatch { .. } | Error::EmptyFamily => exit::PARSE,
            Error::NotHermitian { .. }
            | Error::InvalidProcess(_)
            | Error::Precondition(_)
            | Error::LinearlyDependent => exit::INVARIANT,
            Error::DimensionLimit { .. } => exit::DIMENSION_LIMIT,
            Error::Numerical(_) => exit::NUMERICAL,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::parse(e.to_string())
    }
}
