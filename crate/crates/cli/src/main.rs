use std::process::ExitCode;

use clap::Parser;
use flicker_cli::{run, Cli, Sinks};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut stdout, mut stderr) = (std::io::stdout().lock(), std::io::stderr().lock());
    let mut sinks = Sinks { stdout: &mut stdout, stderr: &mut stderr };
    match run(&cli, &mut sinks) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
