//! Experiment runner: every check and experiment of the library as a
//! subcommand with reproducible seeding and structured CSV/JSON output.
//!
//! Exit codes: 0 when every assertion passes, 1 on any assertion failure,
//! 2 on usage or configuration errors.

mod commands;
mod manifest;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "kofn",
    version,
    about = "k-out-of-n inequality checks and percolation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the inequality over generated event/tree suites, exactly.
    VerifyOsss(commands::VerifyOsssArgs),
    /// Exact coupling checks: final-string marginal, decomposition identity,
    /// conditional-law equality.
    CheckCoupling(commands::CheckCouplingArgs),
    /// Exact density-increment identity on generic events and the R=2 box.
    CheckRusso(commands::CheckRussoArgs),
    /// Hybrid-seed sum across a size grid, with the bounded-bracket contrast.
    LognDemo(commands::LognDemoArgs),
    /// Crossing probabilities and exploration/oracle agreement.
    PercolationCrossing(commands::PercolationCrossingArgs),
    /// Pivotal-count scaling, revealment profiles, and the anchored
    /// inequality check.
    PivotalScaling(commands::PivotalScalingArgs),
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::VerifyOsss(args) => commands::verify_osss(args),
        Command::CheckCoupling(args) => commands::check_coupling(args),
        Command::CheckRusso(args) => commands::check_russo(args),
        Command::LognDemo(args) => commands::logn_demo(args),
        Command::PercolationCrossing(args) => commands::percolation_crossing(args),
        Command::PivotalScaling(args) => commands::pivotal_scaling(args),
    }
}
