//! Configuration parsing, experiment dispatch and artifact emission for the
//! `landau` command.

pub mod artifacts;
pub mod config;
pub mod dispatch;

use thiserror::Error;

pub use config::{emit_config, parse_config, ConfigError, Kind, RunConfig};
pub use dispatch::{dispatch, dump_radial, output_dir, Outcome, OUTPUT_ROOT_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or unreadable input (exit 2).
    #[error("{0}")]
    Usage(String),
    /// The computation itself failed (exit 1).
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("writing artifacts: {e}"))
    }
}

impl From<landau_core::LandauError> for CliError {
    fn from(e: landau_core::LandauError) -> Self {
        CliError::Failure(e.to_string())
    }
}
