//! Experiment runner for `qwalk-core`: adjacency, distribution and sample
//! files, TOML experiment configurations, validation, reproducible runs with
//! manifests, and resource estimates.

pub mod config;
pub mod error;
pub mod estimate;
pub mod io;
pub mod runner;

pub use config::ExperimentConfig;
pub use error::{Diagnostic, Error, Result};
