use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or flags; nothing has been written when this is raised.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("cannot parse config {path}: {message}")]
    ConfigSyntax { path: PathBuf, message: String },

    #[error("baseline {path}: {message}")]
    Baseline { path: PathBuf, message: String },

    #[error("refusing to overwrite baseline entries without --force: {keys}")]
    BaselineExists { keys: String },

    #[error("freeze needs a fully passing run; failed: {failed}")]
    FreezeFailing { failed: String },

    #[error("plot: {0}")]
    Plot(String),

    #[error("malformed report {path}: {message}")]
    Report { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] carlemanlab_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config { key: key.into(), message: message.into() }
    }

    /// Usage-class errors exit with 2, runtime failures with 3.
    pub fn exit_code(&self) -> u8 {
        use carlemanlab_core::Error as E;
        match self {
            Self::Config { .. } | Self::ConfigSyntax { .. } | Self::BaselineExists { .. } => 2,
            Self::Core(E::InvalidParameter(_) | E::InvalidGrid(_) | E::InvalidTimeGrid(_) | E::Support(_) | E::Domain(_)) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
