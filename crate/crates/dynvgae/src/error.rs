use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Invalid(String),
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("missing embedding for snapshot {t}: {}", path.display())]
    MissingEmbedding { t: usize, path: PathBuf },
    #[error(transparent)]
    Core(#[from] dynvgae_core::Error),
}

impl AppError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self::Invalid(msg.into())
    }

    pub(crate) fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for invalid configuration or input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        use dynvgae_core::Error as E;
        match self {
            Self::Invalid(_) | Self::Parse { .. } => 1,
            Self::Core(E::InvalidParameter(_) | E::MissingLabels(_) | E::EmptyInput(_) | E::InvalidSparse(_)) => 1,
            Self::Io { .. } | Self::MissingEmbedding { .. } | Self::Core(_) => 2,
        }
    }
}
