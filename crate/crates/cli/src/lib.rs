//! Configuration ingestion, orchestration of the verification pipeline and versioned reports
//! for the `soliton` command.

pub mod config;
pub mod pipeline;
pub mod report;

use thiserror::Error;

pub use config::{CheckName, CurveConfig, PnWindowConfig, RunConfig, WindowConfig, DEFAULT_PRECISION, PRECISION_ENV};
pub use pipeline::run;
pub use report::{emit, CheckDetails, CheckReport, Format, Report, Status, SCHEMA};

/// Errors raised before or outside the checks themselves.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliError {
    #[error("invalid config: {field}: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("cannot read or write {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed report: {0}")]
    Report(String),
}

/// Exit code for errors that stop a run before any check: configuration and I/O problems.
pub const EXIT_CONFIG: i32 = 3;
