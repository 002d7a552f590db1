use std::io;

use thiserror::Error;

/// Errors raised by the recovery library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid count: {0}")]
    InvalidCount(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("iterate became non-finite at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    /// A failure inside one grid point of an experiment, tagged with the
    /// parameters that produced it.
    #[error("experiment point [{params}] failed: {source}")]
    Experiment {
        params: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// The innermost error, looking through experiment tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Experiment { source, .. } => source.root(),
            other => other,
        }
    }
}
