use std::path::PathBuf;

use tessfact_core::TessError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] TessError),

    /// A core error raised while reading a specific file.
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: TessError },

    #[error("{}: {message}", path.display())]
    Json { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::File { source: e, .. } => match e {
                TessError::InsufficientServers { .. } | TessError::TilesDropped { .. } => 3,
                TessError::SvdNoConvergence { .. } => 4,
                _ => 2,
            },
            CliError::Json { .. } | CliError::Usage(_) => 2,
        }
    }

    pub fn in_file(path: impl Into<PathBuf>) -> impl FnOnce(TessError) -> CliError {
        let path = path.into();
        move |source| CliError::File { path, source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
