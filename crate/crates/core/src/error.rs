use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("support does not fit strictly inside the domain: {0}")]
    Support(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("CFL violation: dt = {dt} exceeds the advective limit {limit:.6e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("iteration diverged: {0}")]
    Diverged(String),

    #[error("malformed field container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
