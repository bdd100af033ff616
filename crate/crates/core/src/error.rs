use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown expert `{0}`")]
    MissingExpert(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid edge {0} -- {1}: {2}")]
    InvalidEdge(String, String, String),

    #[error("partition is not a clique cover: `{0}` and `{1}` share a group but are not adjacent")]
    NotACliqueCover(String, String),

    #[error("graph has {0} vertices, exhaustive search supports at most {1}")]
    TooLarge(usize, usize),

    #[error("dataset is empty after preprocessing")]
    EmptyDataset,

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn missing(id: impl std::fmt::Display) -> Self {
        Error::MissingExpert(id.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
