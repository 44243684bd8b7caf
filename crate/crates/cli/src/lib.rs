//! Experiment runner for Bregman superquantile studies: convergence runs
//! from manifests, coherence and assumption reports, and risk reports on
//! sample files.

pub mod cache;
pub mod convergence;
pub mod error;
pub mod manifest;
pub mod plot;
pub mod report;
pub mod seeds;

pub use error::{CliError, Result};

/// Environment variable holding the default number of worker threads.
pub const THREADS_ENV: &str = "BREGMAN_THREADS";
