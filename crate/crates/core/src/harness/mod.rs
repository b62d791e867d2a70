//! Scenario catalog, configuration, execution and file output.

pub mod catalog;
pub mod config;
pub mod output;
pub mod runner;
pub mod validate;

pub use catalog::{catalog, find, Scenario};
pub use config::{ConfigError, Overrides, SweepParam};
pub use output::{read_csv, write_csv};
pub use runner::{run_resolved, run_scenario, RunManifest, RunOptions, ScenarioError, ScenarioOutput};
