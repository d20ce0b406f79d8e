use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eitforce_cli::config::{Format, McConfig};
use eitforce_cli::error::EXIT_VERIFY_FAILED;
use eitforce_cli::{commands, CliError, Report, RunConfig};

/// Signal, noise and sensitivity of the EIT force interferometer.
#[derive(Parser)]
#[command(name = "eitforce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state signal, noise and sensitivity at one operating point.
    Steady(Common),
    /// Sweep one parameter over the grid in the `sweep` section.
    Sweep(Common),
    /// Compare the closed forms against the numerical oracles.
    Verify(Common),
    /// Evaluate the built-in cold-gas set against published figures.
    Reproduce(Common),
    /// Monte-Carlo output spectrum beside the analytic one.
    McPsd(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file; the built-in reference set when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; overrides `output.path`. Standard output when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte-Carlo seed; creates the `montecarlo` section if absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Output format; overrides `output.format`.
    #[arg(long)]
    format: Option<Format>,
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.montecarlo.get_or_insert_with(McConfig::default).seed = seed;
    }
    if let Some(format) = common.format {
        cfg.output.format = format;
    }
    if let Some(out) = &common.out {
        cfg.output.path = Some(out.clone());
    }
    Ok(cfg)
}

fn emit(report: &Report, cfg: &RunConfig) -> Result<(), CliError> {
    let bytes = report.render(cfg.output.format)?;
    match &cfg.output.path {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

type CommandFn = fn(&RunConfig) -> Result<Report, CliError>;

fn run(cli: Cli) -> Result<Option<bool>, CliError> {
    let (common, cmd): (&Common, CommandFn) = match &cli.command {
        Command::Steady(c) => (c, commands::run_steady),
        Command::Sweep(c) => (c, commands::run_sweep),
        Command::Verify(c) => (c, commands::run_verify),
        Command::Reproduce(c) => (c, |_| commands::run_reproduce()),
        Command::McPsd(c) => (c, commands::run_mc_psd),
    };
    let cfg = load(common)?;
    let report = cmd(&cfg)?;
    emit(&report, &cfg)?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Some(false)) => ExitCode::from(EXIT_VERIFY_FAILED as u8),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eitforce: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
