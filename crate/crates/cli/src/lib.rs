//! Command-line front end: state I/O, measures, figure data and the acceptance runner.
pub mod accept;
pub mod commands;
pub mod error;
pub mod output;

pub use error::{CliError, Result};
