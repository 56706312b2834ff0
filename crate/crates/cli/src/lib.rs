//! Scenario-driven front end for `gck-core`: scenario files, command
//! dispatch and line-oriented reports.

pub mod commands;
pub mod report;
pub mod scenario;

pub use commands::{run_command, Command, RunError, REQUIRED_TAGS};
pub use report::{Record, Report, Verdict};
pub use scenario::{load_scenario, parse_scenario, LoadError, Overrides, Scenario};
