use std::path::PathBuf;

use thiserror::Error;

/// Exit status for bad input or configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when a numerical guarantee (unitarity, normalization, fit conditioning) fails.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit status for failures writing results.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] spincorr::Error),

    #[error("{0}")]
    Config(String),

    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error("invalid manifest {}: {source}", path.display())]
    Manifest { path: PathBuf, source: serde_json::Error },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Write { .. } | CliError::Csv(_) | CliError::Json(_) => EXIT_IO,
            _ => EXIT_CONFIG,
        }
    }
}
