//! `sapt-exchange`: sweeps, extrapolation, fitting and diagnostics for the
//! exchange splitting energy.

mod commands;
mod config;
mod store;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use commands::Session;
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "sapt-exchange", version, about = "Exchange splitting energy of H2+ from symmetry-adapted perturbation theory")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Working precision in decimal digits, overriding the config and the
    /// per-distance default.
    #[arg(long, global = true)]
    digits: Option<u32>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Recompute every point even when the store already holds it.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute exchange records over the configured grid and Omega ladder.
    Sweep,
    /// Levin-extrapolate stored records over the Omega ladder.
    Extrapolate,
    /// Extrapolate and fit the asymptotic constants.
    Fit,
    /// Ratio sequence of RS exchange corrections and local energies.
    Diagnose(PointArgs),
    /// Print the basis functions as CSV.
    DumpBasis(PointArgs),
    /// Write the operator matrices as JSON.
    DumpMatrices(PointArgs),
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Internuclear distance (bohr).
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    omega: Option<u32>,
}

fn session(cli: &Cli) -> anyhow::Result<Session> {
    let (config, config_text) = match &cli.config {
        Some(path) => {
            let (mut cfg, text) = RunConfig::load(path)?;
            if let Some(d) = cli.digits {
                cfg.digits = Some(d);
            }
            cfg.validate()?;
            (Some(cfg), Some(text))
        }
        None => (None, None),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| config.as_ref().map(|c| c.out.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let cache = !cli.no_cache && config.as_ref().is_none_or(|c| c.cache);
    Ok(Session { config, config_text, out, jobs, cache })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let s = session(&cli)?;
    match &cli.command {
        Command::Sweep => {
            let sum = commands::sweep(&s)?;
            println!(
                "computed {} point(s), reused {}, failed {}; records in {}",
                sum.computed,
                sum.cached,
                sum.failed,
                s.out.join(store::RECORDS_FILE).display()
            );
        }
        Command::Extrapolate => {
            let n = commands::extrapolate(&s)?;
            println!("{n} extrapolated record(s) in {}", s.out.join("extrapolated.csv").display());
        }
        Command::Fit => {
            for path in commands::fit(&s)? {
                println!("{}", path.display());
            }
        }
        Command::Diagnose(p) => {
            let (r, omega, eta_points) = commands::resolve_point(&s, p.r, p.omega)?;
            let out = commands::diagnose(&s, r, omega, eta_points, cli.digits)?;
            match out.n_crit {
                Some(n) => println!("n_crit = {n}"),
                None => println!("n_crit not found"),
            }
            println!("{}\n{}", out.ratios.display(), out.local_energy.display());
        }
        Command::DumpBasis(p) => {
            let (r, omega, _) = commands::resolve_point(&s, p.r, p.omega)?;
            print!("{}", commands::dump_basis(&s, r, omega, cli.digits)?);
        }
        Command::DumpMatrices(p) => {
            let (r, omega, _) = commands::resolve_point(&s, p.r, p.omega)?;
            println!("{}", commands::dump_matrices(&s, r, omega, cli.digits)?.display());
        }
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    run(cli).context("sapt-exchange")
}
