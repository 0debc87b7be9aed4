//! `qcorr`: batch front end for two-qubit discord and Gaussian channel tools.
//!
//! Exit codes: 0 success, 1 a property suite failed, 2 usage or validation error.

mod cmd;
mod config;
mod error;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cmd::Output;
use config::{Format, Overrides, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "qcorr", version, about = "Quantum correlations of X-states and bosonic Gaussian channels")]
struct Cli {
    /// key = value file with defaults for the global flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Decimal places in numeric output.
    #[arg(long, global = true)]
    precision: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fock truncation for the Kraus-based suites.
    #[arg(long, global = true)]
    ncut: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discord, classical correlation and mutual information of an X-state.
    Discord(cmd::discord::DiscordArgs),
    /// Tabulate a curve over a parameter grid.
    Sweep(cmd::sweep::SweepArgs),
    /// CP / EB / NB verdicts and canonical forms of a channel (X, Y).
    ClassifyGaussian(cmd::classify::ClassifyArgs),
    /// Critical noise of NOON or PNES inputs against Gaussian thresholds.
    Robustness(cmd::robustness::RobustnessArgs),
    /// Run a seeded property suite.
    Verify(cmd::verify::VerifyArgs),
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let flags = Overrides {
        format: cli.format.as_deref().map(str::parse::<Format>).transpose()?,
        precision: cli.precision,
        seed: cli.seed,
        n_cut: cli.ncut,
        out: cli.out.clone(),
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &flags)?;
    if cli.show_config {
        print!("{}", cfg.render());
        return Ok(true);
    }
    let command = cli.command.as_ref().ok_or_else(|| CliError::Usage("a subcommand is required".into()))?;
    let Output { table, failed } = match command {
        Command::Discord(a) => cmd::discord::run(a)?,
        Command::Sweep(a) => cmd::sweep::run(a)?,
        Command::ClassifyGaussian(a) => cmd::classify::run(a)?,
        Command::Robustness(a) => cmd::robustness::run(a)?,
        Command::Verify(a) => cmd::verify::run(a, &cfg)?,
    };
    let text = match cfg.format {
        Format::Csv => table.to_csv(cfg.precision),
        Format::Json => table.to_json(cfg.precision),
    };
    match &cfg.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(!failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::from(2)
        }
    }
}
