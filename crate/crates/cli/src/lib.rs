//! Command implementations behind the `ascal` binary.

pub mod args;
pub mod commands;
mod diagram;
pub mod error;
pub mod report;

pub use args::{Cli, Command};
pub use error::{exit, CliError, CliResult};

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Calibrate(a) => commands::calibrate(a).map(drop),
        Command::Evaluate(a) => commands::evaluate(a).map(drop),
        Command::Kfold(a) => commands::kfold(a).map(drop),
        Command::Simulate(a) => commands::simulate(a).map(drop),
    }
}
