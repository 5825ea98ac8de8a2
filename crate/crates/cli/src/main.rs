//! `symflow`: batch front end for the symbolic dynamics workbench.
//!
//! Exit status: 0 on success, 2 on domain errors (targets outside the
//! region where a computation is defined), 1 on input errors. Errors are
//! reported on stderr as `error[name]: message`.

mod args;
mod commands;
mod config;
mod output;

use clap::Parser;
use std::process::ExitCode;

pub use output::CliError;

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let result = args::Cli::try_parse_from(&raw)
        .map_err(|e| {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                return None;
            }
            Some(CliError::usage(e.to_string()))
        })
        .and_then(|cli| config::dispatch(cli).map_err(Some));
    match result {
        Ok(()) | Err(None) => ExitCode::SUCCESS,
        Err(Some(e)) => {
            eprintln!("error[{}]: {}", e.name(), e.message().trim_end());
            ExitCode::from(e.exit_code())
        }
    }
}
