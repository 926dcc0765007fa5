use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An enumeration would exceed a hard size guard.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A floating-point solution failed exact re-verification.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
