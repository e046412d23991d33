use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] ms2gd::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn validation(msg: impl Into<String>) -> Self {
        HarnessError::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Validation(_) | HarnessError::Json { .. } => 1,
            HarnessError::Core(ms2gd::Error::Io { .. }) => 2,
            HarnessError::Core(_) => 1,
            HarnessError::Io { .. } | HarnessError::Runtime(_) => 2,
        }
    }
}
