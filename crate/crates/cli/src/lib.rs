//! Configuration, orchestration and reports for the `distsl` binary.
//!
//! All floats are written as `{:.16e}` (17 significant digits) and rows are
//! ordered by index, so a rerun with the same config reproduces every file
//! byte for byte.

pub mod config;
pub mod run;

use thiserror::Error;

pub use config::{Overrides, RunConfig};
pub use run::{run_eigenfunctions, run_spectrum, run_verify};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("solver: {0}")]
    Solver(#[from] distsl::Error),

    #[error("verification failed: {failed} of {total} checks")]
    Verification { failed: usize, total: usize },

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Verification { .. } => 4,
            CliError::Output(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

/// Fixed 17-significant-digit form; `-0` is written as `0`.
pub fn fmt_f(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}
