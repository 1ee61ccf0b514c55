use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("infeasible: {reason}")]
    Infeasible {
        reason: String,
        /// Node sequence of the path that could not be cut, if any.
        path: Option<Vec<usize>>,
    },

    #[error("weight file schema error: {0}")]
    Schema(String),

    #[error("non-finite value produced in layer `{layer}`")]
    Numeric { layer: String },

    #[error("instance sampling failed: {0}")]
    Sampling(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn infeasible(reason: impl Into<String>) -> Self {
        Error::Infeasible {
            reason: reason.into(),
            path: None,
        }
    }
}
