use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate geonames id {0}")]
    DuplicateId(u64),

    #[error("bad cache file {}: {message}", path.display())]
    Cache { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error("model has {vars} variables, cap is {cap}")]
    ModelTooLarge { vars: usize, cap: usize },

    #[error("no feasible assignment exists")]
    Infeasible,

    #[error("inconsistent solution: {0}")]
    InconsistentSolution(String),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
