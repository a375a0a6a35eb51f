//! Command-line front end for the `riskbudget` solvers.
//!
//! Exit codes: 0 success (a converged solve, a passed check), 1 failed
//! `verify` check, 2 iteration limit reached, 3 invalid input, 4 any other
//! failure, including an active box bound or an unbounded problem.

pub mod args;
pub mod commands;
pub mod inputs;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use riskbudget::Error as CoreError;

use crate::args::{Cli, Command};
use crate::commands::{EXIT_INPUT, EXIT_OK, EXIT_OTHER};
use crate::inputs::InputError;

/// Exit code for a failed command.
pub fn error_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<InputError>() {
            return EXIT_INPUT;
        }
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::DimensionMismatch { .. }
                | CoreError::InvalidInput(_)
                | CoreError::NonPositiveExposure { .. }
                | CoreError::NotPositiveSemiDefinite { .. }
                | CoreError::BadDistortionMass(_)
                | CoreError::Parse { .. }
                | CoreError::Csv(_) => EXIT_INPUT,
                _ => EXIT_OTHER,
            };
        }
    }
    EXIT_OTHER
}

/// Runs a parsed command.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Solve(a) => commands::solve(a, stdout),
        Command::Simulate(a) => commands::simulate(a, stdout),
        Command::Contributions(a) => commands::contributions(a, stdout),
        Command::Verify(a) => commands::verify(a, stdout),
        Command::Bench(a) => commands::bench(a, stdout),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Errors are written to `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_INPUT,
            };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    match run(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            error_code(&e)
        }
    }
}
