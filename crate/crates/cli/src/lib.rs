//! Command-line front end: `solve`, `curve`, `simulate` and `verify`.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lastzero::Error;

use crate::config::{CommonArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "lastzero", version, about = "Optimal prediction of the last zero of a spectrally negative Lévy process")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the optimal threshold a* and report the derived constants.
    Solve(CommonArgs),
    /// Tabulate F, G, H and V_a on a grid.
    Curve(CommonArgs),
    /// Monte Carlo estimates with standard errors.
    Simulate(CommonArgs),
    /// Check every invariant and report measured values against thresholds.
    Verify(CommonArgs),
}

pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERIC
    }
}

fn load(args: &CommonArgs) -> Result<RunConfig, Error> {
    let file = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    Ok(file.overlay(args))
}

pub fn run(cli: Cli) -> ExitCode {
    let (args, is_verify) = match &cli.command {
        Command::Solve(a) | Command::Curve(a) | Command::Simulate(a) => (a, false),
        Command::Verify(a) => (a, true),
    };
    let resolved = load(args).and_then(|mut cfg| {
        if is_verify && cfg.mc.n_paths.is_none() {
            cfg.mc.n_paths = Some(verify::DEFAULT_VERIFY_PATHS);
        }
        cfg.resolve()
    });
    let cfg = match resolved {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };

    let result = match &cli.command {
        Command::Solve(_) => commands::solve(&cfg).map(|t| (t, true)),
        Command::Curve(_) => commands::curve(&cfg).map(|t| (t, true)),
        Command::Simulate(_) => commands::simulate(&cfg).map(|t| (t, true)),
        Command::Verify(_) => verify::verify(&cfg),
    };
    match result {
        Ok((text, ok)) => {
            if let Err(e) = output::emit(&text, args.out.as_deref()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_NUMERIC);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
