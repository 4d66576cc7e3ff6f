//! `fire`: experiment workflows for fixed-point restoration priors.

mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use commands::Overrides;
use error::CliError;

#[derive(Parser)]
#[command(name = "fire", version, about = "Fixed-point restoration priors for imaging inverse problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args)]
struct Run {
    /// Experiment config (JSON, `"version": 1`).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem for every input image.
    Restore(Run),
    /// Iterate each prior's restorer with and without its degradation.
    Fixedpoint(Run),
    /// Map the prior loss over a blur/noise grid.
    Probe(Run),
    /// Rank methods and prior sets on the inputs.
    Bench(Run),
    /// Handshake with a remote prior and send one request.
    ServeCheck {
        /// `host:port` or `exec:<command>`.
        #[arg(long)]
        address: String,
        #[arg(long, default_value_t = 10_000)]
        timeout_ms: u64,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot start {n} threads: {e}")))?;
    }
    let load = |run: &Run| {
        let overrides = Overrides {
            seed: run.seed,
            out: run.out.clone(),
        };
        commands::load_config(&run.config, &overrides)
    };
    match &cli.command {
        Command::Restore(run) => commands::restore::run(&load(run)?).map(drop),
        Command::Fixedpoint(run) => commands::fixedpoint::run(&load(run)?).map(drop),
        Command::Probe(run) => commands::probe::run(&load(run)?).map(drop),
        Command::Bench(run) => commands::bench::run(&load(run)?).map(drop),
        Command::ServeCheck { address, timeout_ms } => {
            commands::serve_check::run(address, Duration::from_millis(*timeout_ms))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FIRE_LOG", "warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
