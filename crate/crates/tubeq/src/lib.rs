//! File formats and the `tubeq` command-line front end for `tubeq-core`.

pub mod config;
mod error;
pub mod output;
pub mod run;
pub mod samples;

pub use config::{RunConfig, Task};
pub use error::CliError;
pub use run::{run, RunContext};

/// Sizes the global thread pool from `TUBEQ_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("TUBEQ_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config {
            path: "TUBEQ_THREADS".into(),
            message: format!("expected a positive integer, got `{value}`"),
        })?;
    // a second call within one process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
