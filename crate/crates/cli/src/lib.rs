//! `bpae` command-line front end: stage commands, experiment harnesses and
//! configuration handling over `bpae_core`.

pub mod commands;
pub mod config;
pub mod error;
mod files;

use std::ffi::OsString;

use clap::Parser;

pub use commands::Cli;
pub use config::{expand_grid, PipelineConfig, CONFIG_ENV, DEFAULT_CFG};
pub use error::{exit, CliError};

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    commands::dispatch(cli)
}

/// Entry point used by the binary; returns the process exit status.
pub fn main_with(args: Vec<OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
