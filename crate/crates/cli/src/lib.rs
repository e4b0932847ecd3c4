//! Scenario files, trajectory CSVs, plot data, the built-in examples and the
//! verification campaigns behind the `containment` binary.

pub mod builtin;
pub mod campaign;
pub mod commands;
pub mod error;
pub mod plot;
pub mod report;
pub mod scenario_file;
pub mod trajectory_file;

pub use error::CliError;
