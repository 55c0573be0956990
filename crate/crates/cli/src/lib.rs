//! Configuration ingestion and verification reports for `sovchain`.

pub mod checks;
pub mod config;
pub mod report;

pub use config::{load_config, parse_config, ConfigError, RunConfig};
pub use report::{run, Command, Report};
