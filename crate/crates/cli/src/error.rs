use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or out-of-range user input.
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: u64,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] lamperti_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) | Self::Io { .. } | Self::Parse { .. } => 2,
            Self::Core(e) if is_input_error(e) => 2,
            Self::Core(_) => 3,
        }
    }
}

pub fn is_input_error(e: &lamperti_core::Error) -> bool {
    use lamperti_core::Error::*;
    matches!(
        e,
        Domain { .. } | Grid(_) | LengthMismatch { .. } | TooShort { .. }
    )
}
