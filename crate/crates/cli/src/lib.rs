//! Command-line harness around `eitforce`: configuration parsing, the
//! report renderers and one function per subcommand.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{run_mc_psd, run_reproduce, run_steady, run_sweep, run_verify};
pub use config::RunConfig;
pub use error::CliError;
pub use report::Report;
