mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, CliResult, Outcome};

#[derive(Parser)]
#[command(name = "landau-kam", version, about = "Reducibility experiments for the modulated Landau problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment file; defaults apply without one.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir; default "out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for Monte-Carlo runs (overrides measure.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Table of c_ω, d_ω, a_ω over the configured frequencies.
    Constants,
    /// KAM reduction per (ω, ε) with convergence data.
    Reduce,
    /// Oracle drift of x₁ in the Landau gauge against the reduced prediction.
    LandauGrowth,
    /// Oracle boundedness and rotation numbers in the symmetric gauge.
    SymmetricBounded,
    /// Monte-Carlo excluded fraction of frequencies.
    Measure,
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    let cfg = match &cli.config {
        Some(p) => config::load(p).map_err(CliError::config)?,
        None => config::ExperimentConfig::default(),
    };
    let resolved = config::resolve(cfg).map_err(CliError::config)?;
    let out = cli
        .out
        .clone()
        .or_else(|| resolved.config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Constants => commands::constants(&resolved, &out),
        Command::Reduce => commands::reduce(&resolved, &out),
        Command::LandauGrowth => commands::landau_growth(&resolved, &out),
        Command::SymmetricBounded => commands::symmetric_bounded(&resolved, &out),
        Command::Measure => {
            let seed = cli.seed.unwrap_or(resolved.config.measure.seed);
            commands::measure(&resolved, &out, seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            println!("{}", o.summary);
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
