//! Configuration-driven runner for the shotnoise simulator.

pub mod config;
pub mod figures;
pub mod runner;
pub mod table;
pub mod validate;

pub use config::{ConfigError, ExperimentConfig};
pub use runner::{evaluate, run_config, RunError};
pub use table::{Metadata, ResultTable};
