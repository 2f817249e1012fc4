//! Command-line front end for `flicker-core`: file codecs, the JSON report
//! and the `flicker` subcommands.
//!
//! Exit codes are a stable contract: 0 on success, 2 for input or validation
//! errors, 3 when the requested quantity is undefined for valid input.

pub mod args;
pub mod codec;
pub mod commands;
pub mod error;
pub mod report;

pub use args::Cli;
pub use commands::{run, Sinks};
pub use error::CliError;
