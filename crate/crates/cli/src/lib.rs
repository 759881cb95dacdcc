//! Command-line harness around the `hitrocket` feature transform.
//!
//! Every command reads a JSON run config, and writes its artifacts into the
//! output directory under an exclusive lock. Artifacts other than the
//! `*timing*` files are fully determined by the config and seed.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

use std::path::PathBuf;

pub use config::RunConfig;
pub use error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Transform,
    Train,
    Predict,
    Bench,
    NoiseSweep,
}

pub fn run(command: Command, config: &std::path::Path, seed: Option<u64>, output_dir: Option<PathBuf>) -> Result<()> {
    let cfg = RunConfig::load(config)?.with_overrides(seed, output_dir);
    match command {
        Command::Transform => commands::transform(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Predict => commands::predict(&cfg),
        Command::Bench => commands::bench(&cfg),
        Command::NoiseSweep => commands::noise_sweep(&cfg),
    }
}

/// Sizes the global worker pool from `HITROCKET_THREADS` (0 or unset = automatic).
pub fn configure_threads() -> Result<()> {
    let threads = match std::env::var("HITROCKET_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("HITROCKET_THREADS must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    #[cfg(feature = "parallel")]
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    #[cfg(not(feature = "parallel"))]
    if threads > 1 {
        log::warn!("built without the parallel feature; HITROCKET_THREADS={threads} ignored");
    }
    Ok(())
}
