//! Experiment runner behind the command-line front end: resolved run
//! configurations, per-command reports, sweeps, CSV rows and offline
//! verification of emitted reports.

mod commands;
mod config;
mod output;
mod verify;

pub use commands::{
    exit_code_for, run, BallTransferResult, ChainResult, Command, CommandResult, GapResult, GreenBoundResult,
    LempertResult, NeilVerifyResult, PointReport, Report, EXIT_CHECK_FAILED, EXIT_OK, EXIT_OUT_OF_REGIME,
    EXIT_USAGE, RESIDUAL_TOL, SCHEMA,
};
pub use config::{parse_sweep, to_complex, to_pair, Format, Pair, RunConfig, SMode, SweepEpsilon};
pub use output::{render, to_csv, to_json, CsvRow};
pub use verify::{parse_report, verify_report, Check, VerifyReport, REVALIDATE_TOL};

/// Caps the global worker pool from `PLURIGAP_THREADS`, if set.
pub fn init_thread_pool() -> crate::Result<()> {
    let Ok(v) = std::env::var("PLURIGAP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| crate::Error::InvalidParameter(format!("PLURIGAP_THREADS must be a positive integer, got '{v}'")))?;
    // a second initialization in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
