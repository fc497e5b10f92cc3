//! Library half of the `sscluster` command-line tool: file formats, run
//! configuration, result records and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod record;

pub use config::{ExperimentConfig, Method};
pub use error::{CliError, CliResult};
pub use record::RunRecord;
