//! Crate-wide error type.
//!
//! Every fallible operation returns [`Error`]; the CLI maps variants onto its
//! exit-code contract (invalid input vs. runtime failure), so variants are kept
//! specific enough to make that mapping and the diagnostics unambiguous.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-contract input (bad values, bad ranges, bad flags).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A sample or group is outside the size range a test supports.
    #[error("sample size out of range: {0}")]
    SizeError(String),

    /// Input with no usable variability (constant sample, all-zero differences).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// An optimizer or experiment configuration field is out of its documented range.
    #[error("config error: {0}")]
    Config(String),

    /// A results matrix is not rectangular; the message lists the missing cells.
    #[error("shape error: {0}")]
    Shape(String),

    /// A requested function name is not in the catalog.
    #[error("unknown function '{name}'; valid names: {valid}")]
    UnknownFunction { name: String, valid: String },

    /// A transform chain violates its preconditions (e.g. shift pushes the optimum out).
    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    /// A results CSV row failed to parse; names the line and column.
    #[error("csv error at line {line}, column '{column}': {message}")]
    CsvParse {
        line: usize,
        column: String,
        message: String,
    },

    /// Two CSV rows claim the same (algorithm, function, run, checkpoint) key.
    #[error("csv conflict: {0}")]
    CsvConflict(String),

    /// A record lacks a checkpoint the caller asked for.
    #[error("record {record} is missing checkpoint {checkpoint}")]
    MissingCheckpoint { record: String, checkpoint: u64 },

    /// A tuning budget cannot cover even the minimal race; reports the minimum.
    #[error("budget too small: need at least {minimum} evaluations, got {got}")]
    BudgetTooSmall { minimum: u64, got: u64 },

    /// An external target runner broke the stdout/exit-status protocol.
    #[error("target protocol violation: {0}")]
    Protocol(String),

    /// Results contain failed runs and the caller did not opt into excluding them.
    #[error("results contain failed runs: {0} (pass exclude_failed to drop them)")]
    FailedRuns(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
