use std::path::PathBuf;

/// Errors surfaced by the CLI, pipeline stages and file formats.
#[derive(Debug, thiserror::Error)]
pub enum FmfError {
    #[error(transparent)]
    Core(#[from] fmf_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Validation(String),
    #[error("unknown split id {0:?}")]
    UnknownSplitId(String),
    #[error("backend failure: {0}")]
    Backend(String),
}

pub type Result<T, E = FmfError> = std::result::Result<T, E>;

impl FmfError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FmfError::Io { path: path.into(), source }
    }

    /// Process exit code: 3 for backend failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            FmfError::Backend(_) => 3,
            _ => 2,
        }
    }
}
