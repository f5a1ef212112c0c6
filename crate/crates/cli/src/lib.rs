//! Config-driven runner for the carlemanlab verification experiments.

pub mod baseline;
pub mod config;
pub mod error;
pub mod experiments;
pub mod plot;
pub mod report;
pub mod runner;

pub use config::{Experiment, ExperimentConfig};
pub use error::{CliError, Result};
pub use report::ExperimentReport;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "CARLEMANLAB_THREADS";
