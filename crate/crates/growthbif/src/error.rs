//! Error type shared by all solver layers.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model parameters violate an admissibility condition.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An iterative solver failed to converge.
    #[error("solver error: {0}")]
    Solver(String),

    /// A computed quantity is too close to a degenerate configuration
    /// (vanishing denominator, singular Jacobian, ...).
    #[error("degenerate: {0}")]
    Degenerate(String),

    /// A verification routine found a violated inequality or tolerance.
    #[error("check failed: {0}")]
    CheckFailed(String),

    /// Configuration file or flag combination is invalid.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
    pub fn check(msg: impl Into<String>) -> Self {
        Error::CheckFailed(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
