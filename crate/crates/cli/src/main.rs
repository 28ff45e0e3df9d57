use std::process::ExitCode;

use chunkswarm_cli::{execute, Cli};
use clap::Parser;

fn main() -> ExitCode {
    execute(Cli::parse())
}
