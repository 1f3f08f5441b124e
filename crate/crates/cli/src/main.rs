mod commands;
mod input;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BenchArgs, CompileArgs, GenArgs, NfaArgs, OracleArgs, RunArgs};

#[derive(Debug, Parser)]
#[command(name = "recap", version, about = "Regular path queries with early-filtering aggregates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a query and print a JSON-lines report.
    Run(RunArgs),
    /// Compile a query to recursive SQL.
    Compile(CompileArgs),
    /// Print the transition table of a regex.
    Nfa(NfaArgs),
    /// Evaluate a query by exhaustive walk enumeration.
    Oracle(OracleArgs),
    /// Time a query over a range of maximum lengths and print CSV.
    Bench(BenchArgs),
    /// Write a seeded random graph as edge CSV plus schema JSON.
    Gen(GenArgs),
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Run(a) => commands::run(a),
        Command::Compile(a) => commands::compile(a),
        Command::Nfa(a) => commands::nfa(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Bench(a) => commands::bench(a),
        Command::Gen(a) => commands::gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
