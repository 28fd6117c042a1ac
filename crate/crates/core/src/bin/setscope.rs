use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use setscope::cli::{self, Cli, CliError};

fn run() -> anyhow::Result<i32> {
    let cli = Cli::parse();
    let code = cli::run(cli).context("setscope failed")?;
    Ok(code)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<CliError>()
                .map_or(2, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
