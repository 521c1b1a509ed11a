//! Command-line front end: profile ingestion, sweeps and report emission.
//!
//! Exit codes: 0 when every verification passes, 1 when one fails or a
//! computation breaks down, 2 for usage and configuration errors.

pub mod commands;
pub mod config;

use std::ffi::OsString;

use clap::Parser;

use crate::commands::{execute, RunError};
use crate::config::{Cli, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(&config) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("verification failed");
            EXIT_FAILED
        }
        Err(RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(RunError::Compute(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILED
        }
    }
}
