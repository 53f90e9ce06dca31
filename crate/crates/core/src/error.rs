//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solver failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A function family violates the class invariants it claims.
    #[error("invalid family: {0}")]
    InvalidFamily(String),

    /// Computation refused because it would exceed a hard size limit.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// Sequence support outside what the operation requires.
    #[error("support violation: {0}")]
    Support(String),

    /// Bad experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("report serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
