//! Command-line front end: system files, result documents and command dispatch.

pub mod commands;
pub mod document;
pub mod format;

pub use commands::{run, run_args, Cli, CliError};
pub use document::{ResultDocument, Status};
pub use format::{parse_system, print_system, ParseError, SystemFile};
