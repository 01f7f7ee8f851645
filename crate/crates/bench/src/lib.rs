//! Benchmark harness: instance generation, solver runs with CSV traces,
//! accuracy-grid comparisons, and invariant certification.

pub mod certify;
pub mod compare;
pub mod config;
pub mod run;

use std::fmt;

pub use config::{ConfigError, RunConfig};

/// Exit status for a successful command.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CERTIFY: i32 = 4;

#[derive(Debug)]
pub enum BenchError {
    Config(ConfigError),
    Solver(ucgs_core::Error),
    Io(std::io::Error),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::Io(_) => EXIT_CONFIG,
            BenchError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::Config(e) => write!(f, "config error: {e}"),
            BenchError::Solver(e) => write!(f, "solver abort: {e}"),
            BenchError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for BenchError {}

impl From<ConfigError> for BenchError {
    fn from(e: ConfigError) -> Self {
        BenchError::Config(e)
    }
}

impl From<ucgs_core::Error> for BenchError {
    fn from(e: ucgs_core::Error) -> Self {
        BenchError::Solver(e)
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(e)
    }
}
