//! Scenario files, output formats and the command-line front end for
//! `iadm-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

pub use commands::{cmd_compare, cmd_run, cmd_stability, Options, Outcome, RunManifest};
pub use config::{load, parse, to_toml, LoadedScenario};
pub use error::SimError;
