//! Command-line front end: JSON scenario loading, subcommand dispatch and
//! CSV output.

pub mod commands;
mod error;
pub mod output;
pub mod scenario;

pub use commands::{run, Cli, Command, Grid};
pub use error::{CliError, Result};
pub use output::fmt_num;
pub use scenario::Scenario;
