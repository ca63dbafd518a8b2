//! Command-line front end for `hypersis`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod presets;
pub mod runner;

use std::process::ExitCode;

use cli::{Cli, Command};

/// Dispatches a parsed command line; exit code 1 for invalid input, 2 for
/// numerical failures.
pub fn run(cli: &Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Threshold(args) => commands::threshold(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Experiment(args) => commands::experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
