//! The `mbss` command-line front end.
//!
//! Exit codes: 0 success, 2 some inputs failed but output was written,
//! 64 usage, 65 malformed or inconsistent data, 70 internal failure.

mod args;
mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

use crate::error::Error;

pub use self::args::{Cli, Command};
pub use self::config::{FileConfig, RunConfig};
pub use self::manifest::Manifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

/// A failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) => EXIT_USAGE,
            Error::EmptyLog { .. }
            | Error::EmptyVocabulary
            | Error::DimensionMismatch { .. }
            | Error::InvalidLabel { .. }
            | Error::ClassTooSmall { .. }
            | Error::ZeroVariance
            | Error::Format(_)
            | Error::Csv(_)
            | Error::Json(_) => EXIT_DATA,
            Error::NotPositiveDefinite { .. } | Error::AllFamiliesFailed | Error::Io(_) => {
                EXIT_INTERNAL
            }
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
