use std::process::ExitCode;

use clap::Parser;
use steelclust_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("steelclust: {e}");
            ExitCode::FAILURE
        }
    }
}
