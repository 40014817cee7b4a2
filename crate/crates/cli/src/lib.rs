// SPDX-License-Identifier: Apache-2.0

//! The `cast` command line: argument parsing, thread setup and exit codes.

pub mod args;
mod commands;
mod output;

use anyhow::{Context, Result};
use cast_core::CastError;

pub use args::{Cli, Command};

/// Exit status for user, input and configuration errors.
pub const EXIT_USER: i32 = 1;
/// Exit status for numerical failures inside the analysis.
pub const EXIT_NUMERICAL: i32 = 2;

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "CAST_THREADS";

pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CastError>() {
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_USER,
    }
}

pub fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn deterministic(cmd: &Command) -> bool {
    match cmd {
        Command::Analyze(a) => a.deterministic,
        Command::Sweep(s) => match &s.kind {
            args::SweepKind::Threshold { common, .. }
            | args::SweepKind::Samples { common, .. }
            | args::SweepKind::Rff { common, .. } => common.deterministic,
        },
        Command::Bootstrap(b) => b.deterministic,
        Command::Phases(p) => p.deterministic,
        Command::Compare(_) | Command::Synth(_) | Command::Plotdata(_) => false,
    }
}

/// Sizes the global worker pool: one thread for deterministic runs, else
/// `CAST_THREADS` when set, else rayon's default.
fn init_threads(cmd: &Command) -> Result<()> {
    let threads = if deterministic(cmd) {
        Some(1)
    } else {
        match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?,
            ),
            Err(_) => None,
        }
    };
    if let Some(n) = threads {
        // Fails only if the pool already exists, e.g. when run twice in one process.
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("global thread pool already initialized");
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    init_threads(&cli.command)?;
    match &cli.command {
        Command::Analyze(a) => commands::analyze_cmd(a),
        Command::Sweep(s) => commands::sweep_cmd(s),
        Command::Bootstrap(b) => commands::bootstrap_cmd(b),
        Command::Compare(c) => commands::compare_cmd(c),
        Command::Synth(s) => commands::synth_cmd(s),
        Command::Plotdata(p) => commands::plotdata_cmd(p),
        Command::Phases(p) => commands::phases_cmd(p),
    }
}
