//! Batch runner behind the `thermopetz` binary. Each subcommand module
//! returns its rows in memory and has a fixed CSV schema; `paper` runs them
//! all and writes a figure manifest.

pub mod bounds;
pub mod config;
pub mod error;
pub mod output;
pub mod paper;
pub mod rbm;
pub mod spectrum;
pub mod sweep;

pub use config::Config;
pub use error::{CliError, Result};

/// Settings shared by every subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub max_l: usize,
    /// Record per-point wall time in sweeps. Off by default because timings
    /// break byte-identical reruns.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: 0, max_l: thermopetz::spinchain::DEFAULT_MAX_SITES, timing: false }
    }
}
