use std::process::ExitCode;

use clap::Parser;
use lastzero_cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
