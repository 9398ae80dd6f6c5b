use std::process::ExitCode;

use clap::Parser;

use chargedrop_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chargedrop: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
