//! Command-line front end for `qreset-core`: configuration, reports, sweeps
//! and plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod svg;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "qreset",
    version,
    about = "Mean return and switching times under measurement-induced resetting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the renewal equations for the mean times.
    Solve(CommonArgs),
    /// Estimate the mean times by direct simulation.
    Simulate(SimulateArgs),
    /// Scan one parameter and write a CSV table.
    Sweep(SweepArgs),
    /// Find the mean measurement time minimizing a mean time.
    Optimize(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "QRESET_THREADS")]
    pub threads: Option<usize>,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Write the empirical survival curves as CSV (grid from the config's
    /// `survival` block).
    #[arg(long)]
    pub survival: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.trajectories {
        config.trajectories = n;
    }
    config.validate()?;
    Ok(config)
}

fn in_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("threads: must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    pool.install(f)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => {
            let config = load(&args)?;
            let report = in_pool(args.threads, || commands::solve(&config))?;
            write_output(args.out.as_deref(), &report::to_json(&report))
        }
        Command::Simulate(args) => {
            let config = load(&args.common)?;
            if args.survival.is_some() && config.survival.is_none() {
                return Err(CliError::Config(
                    "survival: --survival needs a survival block in the config".into(),
                ));
            }
            let sim = in_pool(args.common.threads, || commands::simulate(&config))?;
            write_output(args.common.out.as_deref(), &report::to_json(&sim.report))?;
            if let Some(path) = &args.survival {
                let csv = commands::survival_csv(&sim.estimates).expect("survival requested");
                write_output(Some(path), &csv)?;
            }
            Ok(())
        }
        Command::Sweep(args) => {
            let config = load(&args.common)?;
            let table = in_pool(args.common.threads, || commands::sweep(&config))?;
            write_output(args.common.out.as_deref(), &table.to_csv())?;
            if let Some(path) = &args.svg {
                write_output(Some(path), &table.to_svg())?;
            }
            Ok(())
        }
        Command::Optimize(args) => {
            let config = load(&args)?;
            let report = in_pool(args.threads, || commands::optimize(&config))?;
            write_output(args.out.as_deref(), &report::to_json(&report))
        }
    }
}
