mod commands;
mod error;
mod io;
mod params;
mod scheme;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "tessfact",
    version,
    about = "Tessellated distributed computing of linearly decomposable functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Server counts, capacity and tradeoff for a parameter tuple
    Plan(commands::plan::PlanArgs),
    /// Split a demand matrix into communication and computing matrices
    Factorize(commands::factorize::FactorizeArgs),
    /// Push input vectors through a stored scheme
    Simulate(commands::simulate::SimulateArgs),
    /// Evaluate the Marchenko-Pastur law
    Mp(commands::analysis::MpArgs),
    /// Asymptotic reconstruction error of the lossy scheme
    Predict(commands::analysis::PredictArgs),
    /// Monte Carlo reconstruction error against the prediction
    Mc(commands::analysis::McArgs),
    /// Draw the tessellation of the demand matrix
    Tiles(commands::tiles::TilesArgs),
}

/// Caps the rayon pool at `TESSFACT_THREADS` threads; 0 or unset means
/// one per core.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("TESSFACT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::Usage(format!(
            "TESSFACT_THREADS must be a non-negative integer, got {raw:?}"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Plan(a) => commands::plan::run(&a),
        Command::Factorize(a) => commands::factorize::run(&a),
        Command::Simulate(a) => commands::simulate::run(&a),
        Command::Mp(a) => commands::analysis::run_mp(&a),
        Command::Predict(a) => commands::analysis::run_predict(&a),
        Command::Mc(a) => commands::analysis::run_mc(&a),
        Command::Tiles(a) => commands::tiles::run(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
