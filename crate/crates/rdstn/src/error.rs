use std::path::PathBuf;

use rdstn_core::CoreError;

/// Application errors, split by who is at fault: user errors exit 1,
/// internal failures exit 2, and both print one machine-parseable line.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("invalid-argument: {0}")]
    InvalidArgument(String),
    #[error("empty-dataset: no readable images under {0}")]
    EmptyDataset(PathBuf),
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported-image: {path}: {reason}")]
    UnsupportedImage { path: PathBuf, reason: String },
    #[error("decode: {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("checksum-mismatch: {0}")]
    ChecksumMismatch(String),
    #[error("config-mismatch: {0}")]
    ConfigMismatch(String),
    #[error("corrupt-checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("divergence: non-finite loss at step {0}")]
    Divergence(usize),
    #[error("internal: {0}")]
    Internal(String),
}

impl AppError {
    /// CLI exit code: 1 for user-correctable problems, 2 for internal ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::InvalidArgument(_)
            | AppError::EmptyDataset(_)
            | AppError::Io { .. }
            | AppError::UnsupportedImage { .. }
            | AppError::Decode { .. }
            | AppError::ConfigMismatch(_)
            | AppError::Config(_) => 1,
            AppError::ChecksumMismatch(_)
            | AppError::CorruptCheckpoint(_)
            | AppError::Divergence(_)
            | AppError::Internal(_) => 2,
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonFiniteLoss { step } => AppError::Divergence(step),
            other => AppError::InvalidArgument(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for AppError {
    fn from(e: serde_json::Error) -> Self {
        AppError::Config(e.to_string())
    }
}

pub type AppResult<T> = Result<T, AppError>;

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> AppError {
    let path = path.into();
    move |source| AppError::Io { path, source }
}
