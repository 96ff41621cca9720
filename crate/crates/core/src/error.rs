//! Crate-wide error type.

use thiserror::Error;

/// Errors fall into two deliberate categories: `Data` for malformed or
/// inconsistent inputs (bad files, incompatible corpora) and `Usage` for
/// caller mistakes (out-of-range arguments, shape mismatches). The CLI
/// maps them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("data error: {0}")]
    Data(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
