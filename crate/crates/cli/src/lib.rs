//! Scenario-driven batch runner for the symcost engines.

pub mod config;
pub mod plot;
pub mod report;
pub mod run;
pub mod scenarios;

pub use config::{Config, ConfigError, Kind, ScenarioConfig};
pub use report::ReportLine;
pub use run::{run, RunError, RunOptions, RunOutcome};
