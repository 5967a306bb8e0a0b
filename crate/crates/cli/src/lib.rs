//! Library side of the experiment driver: configuration, suites, and
//! report emission. The binary is a thin argument parser over these.

pub mod config;
pub mod emit;
pub mod suites;

pub use config::{ConfigError, ExperimentConfig, OutputFormat, Suite};
pub use suites::{exit_code, run};
