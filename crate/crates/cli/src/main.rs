//! `sgs` — generate benchmark games, solve them, evaluate strategies,
//! cross-check the evaluator against the Monte-Carlo oracle, and run
//! ablation sweeps.
//!
//! Exit codes: 0 success, 1 runtime or validation failure, 2 usage error.

mod commands;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

use commands::{ablate, evaluate, generate, oracle, solve, CliError};

#[derive(Parser)]
#[command(name = "sgs", version, about = "Solver for security games with signaling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate benchmark game files plus a manifest.
    Generate(generate::Args),
    /// Run the evolutionary solver on one game.
    Solve(solve::Args),
    /// Evaluate a strategy file against a game and print the report.
    Evaluate(evaluate::Args),
    /// Validate the analytic evaluator with Monte-Carlo playouts.
    Oracle(oracle::Args),
    /// Run variant x game x seed sweeps and emit a CSV.
    Ablate(ablate::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => generate::run(args),
        Command::Solve(args) => solve::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Oracle(args) => oracle::run(args),
        Command::Ablate(args) => ablate::run(args),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(error)) => {
            eprintln!("error: {error:#}");
            ExitCode::from(1)
        }
    }
}
