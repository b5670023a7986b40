//! Command-line harness: loads fixtures, runs a suite on a bounded worker
//! pool and reports per-case residuals as JSON (CSV for convergence tables).

pub mod config;
pub mod report;
pub mod suites;

use std::time::Instant;

use gbc_core::{GbcError, Result};

pub use config::{Cli, Suite, SuiteConfig};
pub use report::{CaseRecord, Report};

/// Runs the configured suite on a pool of `config.jobs` threads (0: one per
/// core).
pub fn run(config: &SuiteConfig) -> Result<Report> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| GbcError::InvalidParameter(format!("worker pool: {e}")))?;
    let start = Instant::now();
    let cases = pool.install(|| suites::run_suite(config))?;
    Ok(Report::new(config, cases, start.elapsed().as_secs_f64()))
}

/// Process exit status for a finished run or an error.
pub fn exit_status(outcome: &Result<Report>) -> i32 {
    match outcome {
        Ok(r) if r.pass => 0,
        Ok(_) => 1,
        Err(GbcError::Parse(_) | GbcError::UnknownFixture(_) | GbcError::InvalidParameter(_)) => 2,
        Err(_) => 3,
    }
}
