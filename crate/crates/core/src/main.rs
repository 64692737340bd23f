use std::process::ExitCode;

use clap::Parser;
use threadlint::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("threadlint: error: {:#}", anyhow::Error::from(e));
            ExitCode::from(2)
        }
    }
}
