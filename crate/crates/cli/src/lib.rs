//! Configuration-driven runner around `lindep-core`: simulate or ingest
//! output data, identify parameters and initial state, write a JSON report.

pub mod config;
pub mod error;
pub mod ingest;
pub mod noise;
pub mod report;
pub mod runner;

pub use config::Config;
pub use error::CliError;
pub use report::Report;
pub use runner::{execute, prepare, Prepared};
