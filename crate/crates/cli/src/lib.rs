//! Batch interface for the aggshare engine: scenario ingestion, command
//! dispatch and report emission.

pub mod commands;
pub mod report;
pub mod scenario;

use thiserror::Error;

/// Default seed for the randomized audit.
pub const DEFAULT_SEED: u64 = 42;

/// Exit codes: 0 success, 2 usage/parse error, 3 capacity error, 4 empty
/// equilibrium set.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Scenario(#[from] scenario::ScenarioError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Capacity(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Scenario(_) | AppError::Usage(_) | AppError::Output { .. } => 2,
            AppError::Capacity(_) => 3,
        }
    }

    /// Maps engine errors onto the exit-code classes.
    pub fn from_core(err: aggshare_core::Error) -> Self {
        match err {
            aggshare_core::Error::CapacityExceeded { .. } => AppError::Capacity(err.to_string()),
            _ => AppError::Usage(err.to_string()),
        }
    }
}
