use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A family specialization hits a pole or a singular fibre.
    #[error("degenerate point: {0}")]
    Degenerate(String),

    /// A computation would exceed a configured size bound.
    #[error("resource bound exceeded: {0}")]
    Resource(String),

    /// Two independent computations disagree; indicates a bug or inconsistent input.
    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
