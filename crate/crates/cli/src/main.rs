//! `oda` command-line driver.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 numeric failure.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use oda::OdaError;

use crate::args::Cli;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

fn exit_code(err: &OdaError) -> u8 {
    match err {
        OdaError::InvalidConfig(_) => EXIT_USAGE,
        OdaError::NonFinite(_) | OdaError::ZeroVolume { .. } | OdaError::CorruptState(_) => EXIT_NUMERIC,
        OdaError::DimensionMismatch { .. }
        | OdaError::DomainViolation { .. }
        | OdaError::EmptyStream
        | OdaError::Data { .. }
        | OdaError::VersionMismatch { .. }
        | OdaError::Io(_)
        | OdaError::Snapshot(_) => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
