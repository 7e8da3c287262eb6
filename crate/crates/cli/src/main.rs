//! `powerga`: learn, brute-force, predict and evaluate power manifolds.
//!
//! Data goes to files (and machine-readable summaries to stdout); progress
//! and errors go to stderr. Exit codes: 0 success, 2 validation, 3 runtime
//! or numerical failure, 4 I/O.

mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{EvaluateArgs, PredictArgs};
use crate::config::Overrides;

#[derive(Debug, Parser)]
#[command(name = "powerga", version, about = "Learn statistical power manifolds with a genetic algorithm")]
struct Cli {
    /// Log filter for stderr, e.g. `info`, `debug`, `warn`
    #[arg(long, global = true, default_value = "info")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the genetic search and export the learned dictionary
    Learn(Overrides),
    /// Evaluate the oracle on every grid point
    BruteForce(Overrides),
    /// Predict power at query points from a dictionary export
    Predict(PredictArgs),
    /// Compare a GA export against a brute-force export
    Evaluate(EvaluateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .target(env_logger::Target::Stderr)
        .init();

    let result = match &cli.command {
        Command::Learn(o) => commands::learn(o),
        Command::BruteForce(o) => commands::brute_force(o),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                log::error!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code())
        }
    }
}
