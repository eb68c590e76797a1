use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use siegel_reduce::cli::{self, Cli, EXIT_CONFIG, EXIT_FAILED};

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let env_seed = std::env::var(cli::SEED_ENV).ok();
    let mut outcome = cli::run(&args, env_seed.as_deref());

    if !outcome.report.is_empty() {
        let written = match &args.out {
            Some(path) => std::fs::write(path, &outcome.report),
            None => std::io::stdout().lock().write_all(outcome.report.as_bytes()),
        };
        if let Err(e) = written {
            outcome.code = EXIT_FAILED;
            outcome.message = format!("cannot write report: {e}");
        }
    }
    if !outcome.message.is_empty() {
        eprintln!("{}", outcome.message);
    }
    ExitCode::from(outcome.code as u8)
}
