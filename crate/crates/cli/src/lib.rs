//! Command-line pipeline around `edge-placer-core`: generate labeled
//! datasets, solve single instances, train surrogate models, evaluate them,
//! benchmark solver-vs-surrogate timing, and predict allocations.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod reports;

use clap::{Parser, Subcommand};

use edge_placer_core::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "edge-placer",
    about = "Exact and learned application placement for edge servers",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled dataset by sampling and solving instances.
    Gen(commands::gen::GenArgs),
    /// Solve one instance exactly and print the objective breakdown.
    Solve(commands::solve::SolveArgs),
    /// Train surrogate models (svm-grid, mlp-grid or svm-doe).
    Train(commands::train::TrainArgs),
    /// Score a trained bundle against a dataset split.
    Eval(commands::eval::EvalArgs),
    /// Time the exact solver against surrogate inference.
    Bench(commands::bench::BenchArgs),
    /// Predict one instance's stage-1 allocation with a trained bundle.
    Predict(commands::predict::PredictArgs),
}

pub fn run_cli(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(args) => commands::gen::run(args),
        Command::Solve(args) => commands::solve::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Bench(args) => commands::bench::run(args),
        Command::Predict(args) => commands::predict::run(args),
    }
}

/// Process exit code for an error: 2 config, 3 i/o, 4 dimension mismatch,
/// 1 anything else.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Io(_) => 3,
        Error::DimensionMismatch(_) => 4,
        _ => 1,
    }
}
