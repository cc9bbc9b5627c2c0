//! `msgprol`: graph prolongation solver and multiscale autoencoder trainer.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use msgprol::graph::LineageFamily;
use msgprol::Error;

use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "msgprol", version, about = "Optimal graph prolongations and multiscale autoencoder training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write Laplacian and distance matrices of a graph lineage.
    Lineage {
        #[arg(long)]
        family: LineageFamily,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        base: usize,
        #[arg(long, default_value = "lineage")]
        out: PathBuf,
    },
    /// Solve one prolongation problem from a matching initialization.
    SolveProlongation {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a multiscale autoencoder hierarchy.
    TrainMsann {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Recursion count per cycle.
        #[arg(long)]
        gamma: Option<usize>,
        /// Depth of the hierarchy.
        #[arg(long = "L", id = "levels")]
        levels: Option<usize>,
    },
    /// Compare training ledgers.
    Report {
        #[arg(required = true)]
        ledgers: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Json(_) | Error::Domain(_) | Error::UnknownStrategy { .. } => 3,
        Error::Numerical(_) | Error::Constraint(_) | Error::DegenerateScale(_) => 4,
        _ => 1,
    }
}

fn out_dir(flag: Option<PathBuf>, run: &RunConfig, fallback: &str) -> PathBuf {
    flag.or_else(|| run.out.clone()).unwrap_or_else(|| PathBuf::from(fallback))
}

fn dispatch(cmd: Command) -> msgprol::Result<String> {
    match cmd {
        Command::Lineage {
            family,
            depth,
            base,
            out,
        } => commands::lineage(family, depth, base, &out),
        Command::SolveProlongation { config, seed, out } => {
            let run = RunConfig::load(&config)?;
            let out = out_dir(out, &run, "solve-out");
            commands::solve(&run, seed, &out)
        }
        Command::TrainMsann {
            config,
            seed,
            out,
            gamma,
            levels,
        } => {
            let run = RunConfig::load(&config)?;
            let out = out_dir(out, &run, "train-out");
            commands::train(&run, seed, levels, gamma, &out)
        }
        Command::Report { ledgers, out } => commands::report(&ledgers, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
