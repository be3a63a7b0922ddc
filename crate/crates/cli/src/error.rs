use std::path::PathBuf;

use thiserror::Error;

/// Failures of a batch run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("resource refusal: {0}")]
    Resource(String),

    #[error("bound violation: {0}")]
    Violation(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(thermopetz::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) | CliError::Numerical(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Resource(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<thermopetz::Error> for CliError {
    fn from(e: thermopetz::Error) -> Self {
        use thermopetz::Error as E;
        match e {
            E::Resource { .. } => CliError::Resource(e.to_string()),
            E::Parameter(_) | E::Partition(_) | E::Permutation(_) | E::Index(_) | E::Shape(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
