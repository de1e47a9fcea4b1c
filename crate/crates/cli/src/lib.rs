//! Config-driven parameter sweeps over the `spinlock-core` models.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{load_config, Experiment, RunConfig};
pub use error::CliError;
pub use output::Table;
pub use runner::{run, run_with_threads, Overrides};

/// Worker count from `--threads`, falling back to `SPINLOCK_THREADS`.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("SPINLOCK_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::validation("SPINLOCK_THREADS", "must be a positive integer")),
        _ => Ok(None),
    }
}
