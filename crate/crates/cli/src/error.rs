use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    /// A data file referenced by the scenario failed to load.
    #[error("{}: {source}", path.display())]
    Data { path: PathBuf, source: nspmarket_core::Error },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Model(#[from] nspmarket_core::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn config(path: &Path, message: impl Into<String>) -> Self {
        CliError::Config { path: path.to_path_buf(), message: message.into() }
    }

    pub(crate) fn data(path: &Path, source: nspmarket_core::Error) -> Self {
        CliError::Data { path: path.to_path_buf(), source }
    }

    /// Attributes a validation failure to the scenario file `path`.
    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Invalid(m) => CliError::config(path, m),
            CliError::Model(e) => CliError::config(path, e.to_string()),
            other => other,
        }
    }

    /// 3 when a solver ran out of iterations, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(nspmarket_core::Error::NonConvergence { .. }) => 3,
            _ => 2,
        }
    }
}
