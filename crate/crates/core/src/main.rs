use std::process::ExitCode;

use clap::Parser;
use mconcord::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
