mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use stagewise::{ErrorCategory, Parallelism};

use args::{Cli, Command};
use commands::CertificationFailed;
use config::FileConfig;

pub const THREADS_ENV: &str = "STAGEWISE_THREADS";

fn threads(cli: &Cli, file: &FileConfig) -> anyhow::Result<Option<usize>> {
    if let Some(t) = cli.threads.or(file.threads) {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| stagewise::Error::Config(format!("{THREADS_ENV}={v:?} is not a thread count")).into()),
        Err(_) => Ok(None),
    }
}

#[cfg(feature = "parallel")]
fn init_threads(n: usize) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| stagewise::Error::Config(format!("thread pool: {e}")).into())
}

#[cfg(not(feature = "parallel"))]
fn init_threads(_: usize) -> anyhow::Result<()> {
    log::info!("built without parallel support; ignoring thread count");
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    if let Some(n) = threads(&cli, &file)? {
        init_threads(n)?;
    }
    let parallelism = if cli.sequential || file.sequential == Some(true) {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    };
    match &cli.command {
        Command::Solve(a) => commands::solve(a, &file),
        Command::Stagewise(a) => commands::stagewise(a, &file),
        Command::CheckMonotone(a) => commands::check_monotone(a, parallelism),
        Command::Simulate(a) => commands::simulate(a, &file),
        Command::Diagnose(a) => commands::diagnose(a),
        Command::Certify(a) => commands::certify(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<stagewise::Error>() {
        return match e.category() {
            ErrorCategory::Config => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Solver => 4,
            ErrorCategory::Internal => 5,
        };
    }
    if err.downcast_ref::<CertificationFailed>().is_some() {
        return 4;
    }
    if err.downcast_ref::<std::io::Error>().is_some() || err.downcast_ref::<serde_json::Error>().is_some() {
        return 3;
    }
    5
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
