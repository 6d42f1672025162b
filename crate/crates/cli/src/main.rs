use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use unsharp_cli::{run, Cli, EXIT_INPUT};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    match &cli.common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &report.body) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT);
            }
        }
        None => {
            let _ = std::io::stdout().write_all(report.body.as_bytes());
        }
    }
    if let Some(dump) = &report.dump {
        eprintln!("FINDING");
        eprint!("{dump}");
    }
    ExitCode::from(report.code)
}
