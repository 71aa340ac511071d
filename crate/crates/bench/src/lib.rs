//! Experiment harness for the `ttno` crate: parameter sweeps over the spin
//! models producing rank, memory and error tables as CSV, and a verification
//! suite that checks the library's invariants against dense oracles.

pub mod config;
pub mod experiment;
pub mod fixtures;
pub mod verify;

use std::fmt;

pub use config::{ExperimentConfig, ExperimentKind, OracleMode, TreeKind};
pub use experiment::{rank_table, run_experiment, write_csv, write_csv_file, RankTableRow, ResultRow, RunOutput};
pub use verify::{verify, verify_with, CheckResult, CheckStatus, VerifyReport};

#[derive(Debug)]
pub enum BenchError {
    /// Invalid configuration or arguments.
    Usage(String),
    Library(ttno::Error),
    Io(String),
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Library(e) => write!(f, "{e}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for BenchError {}

impl From<ttno::Error> for BenchError {
    fn from(e: ttno::Error) -> Self {
        Self::Library(e)
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for BenchError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}
