//! `tavis` — command-line front end for the two-qubit/resonator simulator.
//!
//! Six subcommands produce the standard tables and figures: `revival`
//! (ground-state return probability), `qfunc` (phase-space heatmap), `xdist`
//! (x-quadrature channel densities), `ps` (heralding success probability),
//! `herald` (seeded measurement shots), and `width` (plateau-width sweep).
//! Output is CSV, JSON, or static SVG; every run is deterministic given its
//! resolved configuration.

mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command};

/// Exit code 2: configuration problems. Exit code 3: numerical failures
/// (truncation, unresolvable peaks, out-of-grid requests).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl From<tavis_core::Error> for CliError {
    fn from(e: tavis_core::Error) -> Self {
        match e {
            tavis_core::Error::InvalidParams(m) => CliError::Config(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = config::resolve(&cli).and_then(|resolved| match cli.command {
        Command::Revival => commands::cmd_revival(&resolved),
        Command::Qfunc => commands::cmd_qfunc(&resolved),
        Command::Xdist => commands::cmd_xdist(&resolved),
        Command::Ps => commands::cmd_ps(&resolved),
        Command::Herald => commands::cmd_herald(&resolved),
        Command::Width => commands::cmd_width(&resolved),
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
