use thiserror::Error;

use crate::harness::Probe;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A configured size cap (enumeration count, dense entries) was exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    /// The searched range never reached the requested success rate.
    #[error("threshold outside search range: {message}")]
    Range { message: String, probes: Vec<Probe> },
}

impl Error {
    pub fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
