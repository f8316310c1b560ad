//! `cumac`: runs the channel, bus-load, energy, speculation and forgery
//! harnesses from a JSON config and writes CSV / JSON reports.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 for runtime
//! errors.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::report::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cumac", version, about = "Cumulative MAC evaluation harnesses")]
struct Cli {
    /// JSON config; its sections override the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report directory.
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Lossy-channel runs for each scheme and drop rate.
    Simulate,
    /// CAN bus load curves and supported message counts.
    Busload,
    /// Sensor service life against tag size.
    Energy,
    /// Fit a speculation model to a trace and report its error rates.
    Speculate,
    /// uf-cma-r forgery experiments at toy parameters.
    Attack,
    /// Strength/delay curves, drop-rate sweep and summary across schemes.
    Compare,
    /// Print the built-in default config.
    Defaults,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Busload => "busload",
            Command::Energy => "energy",
            Command::Speculate => "speculate",
            Command::Attack => "attack",
            Command::Compare => "compare",
            Command::Defaults => "defaults",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Command::Defaults = cli.command {
        print!("{}", config::DEFAULTS);
        return Ok(());
    }
    let cfg = RunConfig::load(cli.config.as_deref(), cli.seed)?;
    let tables = match cli.command {
        Command::Simulate => commands::simulate(&cfg)?,
        Command::Busload => commands::busload(&cfg)?,
        Command::Energy => commands::energy(&cfg)?,
        Command::Speculate => commands::speculate(&cfg)?,
        Command::Attack => commands::attack(&cfg)?,
        Command::Compare => commands::compare(&cfg)?,
        Command::Defaults => unreachable!(),
    };
    let name = cli.command.name();
    let written = report::write(&cli.out, name, &tables, cli.format, &cfg.digest(name), cfg.seed)?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cumac: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
