//! Command-line front end: edge-list ingestion, subcommands and report output.

pub mod commands;
pub mod edgelist;
pub mod error;
pub mod format;
pub mod report;

pub use commands::{run, threads_from_env, Cli};
pub use error::CliError;
