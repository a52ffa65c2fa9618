mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use gnnx_core::Error;

use args::{Cli, Command};

/// 0 ok, 2 usage, 3 taxonomy violation, 4 I/O, 5 numeric failure, 1 anything else.
fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::InvalidConfig(_) => 2,
        Error::Taxonomy { .. } => 3,
        Error::Io { .. }
        | Error::Malformed { .. }
        | Error::IdOutOfRange { .. }
        | Error::CountMismatch { .. }
        | Error::Checkpoint(_)
        | Error::Json(_) => 4,
        Error::Numeric(_) => 5,
        _ => 1,
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("GNNX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("GNNX_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let res = match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::TrainTarget(a) => commands::train_target(a),
        Command::Attack(a) => commands::attack(a),
        Command::Split(a) => commands::split(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
