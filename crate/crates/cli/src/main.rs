use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = dimgen_cli::Cli::parse();
    let stdout = std::io::stdout();
    match dimgen_cli::run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
