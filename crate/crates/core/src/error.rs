use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A size guard refused a computation that would be too large.
    #[error("resource guard: {0}")]
    Resource(String),
    /// A structure failed its axioms.
    #[error("invalid structure: {0}")]
    Invalid(String),
    /// Exact integer arithmetic overflowed 128 bits.
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
