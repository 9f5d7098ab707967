//! Command-line front end: configuration, CSV ingestion and emission, and
//! one command per analysis step.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod svg;

pub use commands::run_command;
pub use config::{from_args, RunConfig};
pub use error::CliError;
