//! `twh`: batch front end for twh-core.
//!
//! Exit codes: 0 success, 2 usage or validation, 3 numerical-quality
//! failure, 4 internal error.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use config::{apply_overrides, Cli, Command, PiiAction};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical quality: {0}")]
    Numerical(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

/// Caps the rayon pool at `TWH_THREADS` workers.
fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("TWH_THREADS") else { return Ok(()) };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Usage(format!("TWH_THREADS = `{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Internal(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::Pii { action: PiiAction::Print(a) } => {
            let a = match cfg { Some(p) => apply_overrides(a, p)?, None => a };
            commands::pii_print(&a)
        }
        Command::Tw(a) => {
            let a = match cfg { Some(p) => apply_overrides(a, p)?, None => a };
            commands::tw(&a)
        }
        Command::Compare(a) => {
            let a = match cfg { Some(p) => apply_overrides(a, p)?, None => a };
            commands::compare(&a)
        }
        Command::Constants(a) => {
            let a = match cfg { Some(p) => apply_overrides(a, p)?, None => a };
            commands::constants(&a)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twh: {e}");
            ExitCode::from(e.code())
        }
    }
}
