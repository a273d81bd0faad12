//! Config-driven experiment runner around `critlab-core`.

pub mod config;
pub mod demos;
pub mod output;
pub mod runner;
pub mod svg;

pub use config::{load_config, parse_config, ConfigError, Experiment, ExperimentConfig};
pub use output::{emit_outputs, Formats, OutputError};
pub use runner::{run_experiment, ResultBundle, Table, Verdict};
