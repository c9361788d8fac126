//! Error types shared across the laboratory.

use thiserror::Error;

/// Unified error type for configuration, usage, numerical, and I/O failures.
#[derive(Debug, Error)]
pub enum Error {
    /// The requested configuration is internally inconsistent (bad grid,
    /// kernel wrap violation, degenerate amplitude, ...). Maps to exit
    /// code 2 in the CLI.
    #[error("configuration error: {0}")]
    Config(String),

    /// A precondition of an operation was violated by the caller
    /// (step out of range, shape mismatch, unnormalized density, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// A NaN/infinity or zero-mass state was produced during evolution.
    #[error("numerical failure at step {step}: {what}")]
    Numerical { step: usize, what: String },

    /// File I/O or serialization failure. Maps to exit code 3 in the CLI.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn numerical(step: usize, what: impl Into<String>) -> Self {
        Error::Numerical {
            step,
            what: what.into(),
        }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Error::Io(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
