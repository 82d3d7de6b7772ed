//! Reproducible command-line entry points: BD and planar-spiral simulation,
//! potential computations on truncation ladders, subdivision construction
//! and verification, and trace recurrence profiles.
//!
//! Exit codes: 0 success, 2 configuration error, 3 step-budget exhaustion,
//! 4 degenerate-δ guard, 5 invariant assertion failure.

mod commands;
mod config;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chaintrace", version, about)]
struct Cli {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Worker pool size for per-seed fan-out (defaults to the core count).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate birth-and-death runs and write crossing ledgers.
    SimulateBd(commands::simulate_bd::Args),
    /// Simulate the planar spiral chain and write edge-coverage ledgers.
    SimulateZ2(commands::simulate_z2::Args),
    /// Capacity/voltage/Green reports over a truncation ladder.
    Potential(commands::potential::Args),
    /// Build the δ-subdivided auxiliary chain and verify its properties.
    Subdivide(commands::subdivide::Args),
    /// Recurrence profiles from ledgers or exact expected-crossing networks.
    Trace(commands::trace::Args),
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let config = match config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    let result = match cli.command {
        Command::SimulateBd(args) => commands::simulate_bd::run(args, &config),
        Command::SimulateZ2(args) => commands::simulate_z2::run(args, &config),
        Command::Potential(args) => commands::potential::run(args, &config),
        Command::Subdivide(args) => commands::subdivide::run(args, &config),
        Command::Trace(args) => commands::trace::run(args, &config),
    };
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
