use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command line, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config {path}: {msg}")]
    Config { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error(transparent)]
    Model(#[from] delayflux_core::Error),

    /// Outputs were written but the computation failed or did not converge.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use delayflux_core::Error as E;
        match self {
            CliError::Numerical(_) => 1,
            CliError::Model(e) => match e {
                E::NonFinite { .. } | E::OrderingViolation { .. } | E::Convergence(_) => 1,
                _ => 2,
            },
            CliError::Io { .. } => 1,
            CliError::Usage(_) | CliError::Config { .. } | CliError::Format { .. } => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
