use std::io;

use thiserror::Error;

/// Coarse error class used by callers (e.g. the CLI) to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numeric,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("partition invariant violated: {0}")]
    Invariant(String),

    #[error("move would empty the source cluster")]
    EmptyClusterMove,

    #[error("numeric underflow: {0}")]
    Underflow(String),

    #[error("unbalanced transport weights: {0}")]
    Balance(String),

    #[error("undefined normalization: {0}")]
    UndefinedNormalization(String),

    #[error("problem too large: {0}")]
    Scale(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("cache inconsistent: {0}")]
    Consistency(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Param(_) | Error::Scale(_) => ErrorCategory::Config,
            Error::Parse { .. }
            | Error::Input(_)
            | Error::Dimension { .. }
            | Error::Invariant(_)
            | Error::EmptyClusterMove
            | Error::EmptyInput(_)
            | Error::Contract(_) => ErrorCategory::Data,
            Error::Underflow(_)
            | Error::Balance(_)
            | Error::UndefinedNormalization(_)
            | Error::Consistency(_) => ErrorCategory::Numeric,
            Error::Io(_) => ErrorCategory::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
