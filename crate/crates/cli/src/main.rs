//! Entry point: parses arguments, configures logging and the thread pool,
//! dispatches to a subcommand, and maps failures to exit codes.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data errors, 3 for
//! numerical failures.

mod artifact;
mod cli;
mod commands;
mod dataset;
mod errors;
mod plot;

use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::{Cli, Command};
use crate::errors::{CliError, Result};

fn dispatch(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage(
                "--threads must be at least 1".to_string(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Fit(args) => commands::run_fit(args),
        Command::Cv(args) => commands::run_cv(args),
        Command::Predict(args) => commands::run_predict(args),
        Command::Simulate(args) => commands::run_simulate(args),
        Command::Selfcheck(args) => commands::run_selfcheck(args),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRPDESC_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                print!("{e}");
                std::process::exit(0);
            }
            let text = e.to_string();
            let merged = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty() && !l.starts_with("For more information"))
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("error: usage: {}", merged.trim_start_matches("error: "));
            std::process::exit(1);
        }
    };

    if let Err(e) = dispatch(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
