//! Runner behind the `dkg` binary: configuration, suites and artifact export.
//!
//! Exit codes: 0 pass, 1 assertion failure, 2 configuration error, 3 numerical failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod suites;

use dkg_core::DkgError;

pub use commands::{certificate, simulate, verify, Outcome};
pub use config::RunConfig;
pub use suites::{Check, Suite, SuiteReport};

pub const VERSION: &str = concat!("dkg ", env!("CARGO_PKG_VERSION"));

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DkgError> for CliError {
    fn from(e: DkgError) -> Self {
        match e {
            DkgError::Config(_) | DkgError::Domain(_) | DkgError::Precondition(_) => CliError::Config(e.to_string()),
            DkgError::Range { .. } | DkgError::Numerical { .. } | DkgError::Estimation(_) => CliError::Numerical(e.to_string()),
            DkgError::Io(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// Runs `f` on a pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("output.workers: {e}")))?;
    Ok(pool.install(f))
}
