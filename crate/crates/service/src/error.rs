use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] swarmsearch_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stream(#[from] std::io::Error),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("malformed click token")]
    BadToken,
    #[error("unknown or already used click token")]
    UnknownToken,
    #[error("page number must be at least 1")]
    BadPage,
}

impl ServiceError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;
