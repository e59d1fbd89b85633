//! `erasure-ot`: batch front end for protocol campaigns, adversary audits,
//! exact oracle checks and rate-region sweeps.
//!
//! Exit codes: 0 success, 2 invalid input, 3 oracle budget exceeded,
//! 4 I/O failure.

mod commands;
mod config;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{AuditArgs, Common, OracleArgs, ProtocolArgs, RegionArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "erasure-ot", version, about = "Two-receiver oblivious transfer over erasure broadcast channels")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run honest executions and report correctness and abort statistics.
    Simulate(ProtocolArgs),
    /// Run the condition suite and attacker strategies on a campaign.
    Audit(AuditArgs),
    /// Exact enumeration of a tiny instance.
    Oracle(OracleArgs),
    /// Closed-form regions and general converse bounds.
    Region(RegionArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.common;
    let output = match cli.command {
        Command::Simulate(a) => commands::simulate(a.merge(config::load(&common)?))?,
        Command::Audit(a) => commands::audit(a.merge(config::load(&common)?))?,
        Command::Oracle(a) => commands::oracle(a.merge(config::load(&common)?))?,
        Command::Region(a) => commands::region(a.merge(config::load(&common)?))?,
    };
    if let Some(seed) = output.seed {
        eprintln!("seed: {seed}");
    }
    match &common.out {
        Some(path) => write_atomic(path, &output.body),
        None => std::io::stdout().write_all(output.body.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, body: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(body.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
