//! Error type shared by every module.

use thiserror::Error;

/// Failures surfaced by the library. The CLI maps the variants onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent user input (files, matrices, parameters).
    #[error("input error: {0}")]
    Input(String),
    /// A configured size or degree cap would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A statistical procedure produced no usable result.
    #[error("statistical failure: {0}")]
    Statistical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// Prefix the message with the stage that produced it.
    pub fn context(self, stage: &str) -> Self {
        match self {
            Error::Input(m) => Error::Input(format!("{stage}: {m}")),
            Error::Resource(m) => Error::Resource(format!("{stage}: {m}")),
            Error::Statistical(m) => Error::Statistical(format!("{stage}: {m}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
