use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = NapError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum NapError {
    /// Bad configuration key, value or command-line usage.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data that cannot be processed.
    #[error("data error: {0}")]
    Data(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Loss or parameters became non-finite.
    #[error("training diverged at epoch {epoch}: {message}")]
    Divergence { epoch: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl NapError {
    pub fn data(msg: impl Into<String>) -> Self {
        NapError::Data(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        NapError::Config(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        NapError::Shape(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NapError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage, 2 data, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            NapError::Config(_) => 1,
            NapError::Data(_)
            | NapError::Parse { .. }
            | NapError::Io { .. }
            | NapError::Json(_) => 2,
            NapError::Shape(_) | NapError::Divergence { .. } => 3,
        }
    }
}
