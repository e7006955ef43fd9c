use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = bellstab_cli::app::Cli::parse();
    ExitCode::from(bellstab_cli::app::execute(cli))
}
