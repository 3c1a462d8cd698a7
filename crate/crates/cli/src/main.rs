use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod failure;
mod report;

use args::{Cli, Command};
use failure::{Failure, Outcome};

fn init_threads(threads: Option<usize>) -> Outcome {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Outcome {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Denoise(a) => commands::denoise(a),
        Command::Qab(a) => commands::qab(a),
        Command::Noise(a) => commands::noise(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Ipr(a) => commands::ipr(a),
        Command::Hyper(a) => commands::hyper(a),
        Command::Bench(a) => commands::bench(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dequip: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
