//! Command-line front end for [`lksmult`]: each subcommand builds a
//! [`RunConfig`], runs one module pipeline and emits a JSON report, with
//! numeric series optionally written as CSV.

pub mod audit;
pub mod commands;
pub mod config;
pub mod report;

pub use config::RunConfig;
pub use report::Report;

use lksmult::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] lksmult::Error),
    #[error("output: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code: 2 for malformed input and failed preconditions,
    /// 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.class() == ErrorClass::Solver => 3,
            CliError::Io(_) => 3,
            _ => 2,
        }
    }
}

/// Version string embedded in every report.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("LKSMULT_GIT_DESCRIBE"), ")");

pub fn version() -> String {
    VERSION.to_string()
}

/// Cap rayon's global pool from `LKSMULT_THREADS`, once per process.
pub fn init_threads() {
    if let Some(n) = std::env::var("LKSMULT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("LKSMULT_THREADS ignored: {e}");
            }
        }
    }
}
