mod args;
mod commands;
mod error;
mod input;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    match &cli.command {
        Command::Fit(a) => commands::fit(a, "fit", false),
        Command::Cv(a) => commands::fit(a, "cv", true),
        Command::Simulate(a) => commands::simulate(a),
        Command::Breakdown(a) => commands::breakdown(a),
        Command::Overshrink(a) => commands::overshrink(a),
        Command::Influence(a) => commands::influence(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("taulasso: {e}");
            e.exit_code()
        }
    }
}
