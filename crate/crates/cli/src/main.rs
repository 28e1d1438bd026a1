//! `maprepair` command-line tool.
//!
//! Exit status: 0 on success or a safe verdict, 1 on an unsafe verdict,
//! 2 on usage, input or parse errors.

mod commands;
mod input;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{BenchArgs, CheckArgs, EvalArgs, GenArgs, LearnArgs, RepairArgs};

#[derive(Parser, Debug)]
#[command(
    name = "maprepair",
    version,
    about = "Check and repair s-t tgds against policy views"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a mapping is safe with respect to a policy.
    Check(CheckArgs),
    /// Rewrite an unsafe mapping into a safe one.
    Repair(RepairArgs),
    /// Record golden comparisons as k-NN training data.
    Learn(LearnArgs),
    /// Compare a learned preference function with a golden one.
    Eval(EvalArgs),
    /// Generate a synthetic scenario.
    Gen(GenArgs),
    /// Repair generated scenarios and report timings.
    Bench(BenchArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => commands::check(a),
        Command::Repair(a) => commands::repair(a),
        Command::Learn(a) => commands::learn(a),
        Command::Eval(a) => commands::eval(a),
        Command::Gen(a) => commands::gen(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
