use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::Job;

/// Batch front end for the HJM stochastic-volatility ADI pricer.
#[derive(Debug, Parser)]
#[command(name = "hjm-sv", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML job file; every section is optional.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Root seed of the Monte Carlo streams.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Directory receiving the CSV artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs everything sequentially, 0 picks automatically.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price the configured instrument and write price, Greeks and step tables.
    Price,
    /// Sweep mesh sizes and steps per year and report observed orders.
    Convergence,
    /// Compare the PDE price with the Monte Carlo oracle.
    ValidateMc,
    /// Write the stretched axes and an assembled r line.
    MeshDump,
    /// Time the caplet solve and the Monte Carlo pricer, sequential and parallel.
    Bench {
        /// Timed repetitions per configuration.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

fn run(cli: Cli) -> Result<bool> {
    let mut job = Job::load(cli.global.config.as_deref())?;
    commands::apply_overrides(&mut job, cli.global.seed, cli.global.threads)?;
    let out = cli
        .global
        .out
        .or_else(|| job.config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating output directory {}", out.display()))?;
    match cli.command {
        Command::Price => commands::price(&job, &out),
        Command::Convergence => commands::convergence(&job, &out),
        Command::ValidateMc => commands::validate_mc(&job, &out),
        Command::MeshDump => commands::mesh_dump(&job, &out),
        Command::Bench { repeats } => commands::bench(&job, &out, repeats),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
