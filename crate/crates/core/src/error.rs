//! Error type shared by every module, with process exit codes for the CLI.

use thiserror::Error;

/// Toolkit-wide error.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration, shapes, or usage (exit code 1).
    #[error("config error: {0}")]
    Config(String),
    /// Bad or missing input data (exit code 2).
    #[error("data error: {0}")]
    Data(String),
    /// Numeric failure: non-finite values, non-converged solves (exit code 3).
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Process exit code: 1 config, 2 data, 3 numeric. I/O counts as data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Io(_) => 2,
            Error::Numeric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
