//! Command-line front end for `sphere-mt`: subcommands, field files and
//! report emitters.

pub mod args;
pub mod check;
pub mod commands;
pub mod error;
pub mod field_file;
pub mod report;

use clap::error::ErrorKind;
use clap::Parser;

pub use error::{code, CliError};

/// Parses `argv`, runs the command, and returns the process exit code.
pub fn main_with_args<I, S>(argv: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => code::SUCCESS,
                _ => code::USAGE,
            };
        }
    };
    match commands::run(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
