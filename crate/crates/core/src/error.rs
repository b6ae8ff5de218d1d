//! Error types shared across the pipeline.

use std::path::PathBuf;

use thiserror::Error;

/// Top-level error for pipeline operations.
#[derive(Debug, Error)]
pub enum DoxError {
    /// A corpus file or directory could not be read.
    #[error("ingest error reading {path}: {message}")]
    Ingest { path: PathBuf, message: String },

    /// Invalid run configuration (empty aspect set, bad thresholds, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A structured input file violated its schema.
    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },

    /// The embedding backend failed.
    #[error(transparent)]
    Backend(#[from] BackendError),

    /// The brute-force oracle was handed an instance beyond its size caps.
    #[error("instance too large for the oracle: {0}")]
    TooLarge(String),
}

/// Errors raised by embedding backends.
#[derive(Debug, Error)]
pub enum BackendError {
    /// The remote endpoint stayed unreachable or kept failing after retries.
    /// Carries the batch that failed so callers can report or retry it.
    #[error("backend request failed after {attempts} attempts ({message}); batch of {} texts", failing_batch.len())]
    RequestFailed {
        attempts: u32,
        message: String,
        failing_batch: Vec<String>,
    },

    /// The endpoint answered but the payload violated the wire contract.
    #[error("invalid backend response: {0}")]
    InvalidResponse(String),
}
