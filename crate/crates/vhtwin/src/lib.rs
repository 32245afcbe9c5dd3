//! Std companion of `vhtwin-core`: traffic and roster CSV loading, the
//! experiment config file, reports, twin persistence, a rayon executor and
//! the commands behind the `vhtwin` binary.

pub mod config;
pub mod dataio;
pub mod error;
pub mod exec;
pub mod report;
pub mod runner;
pub mod twinfile;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use report::{emit, emit_report, EvalReport, Format, ReportSet};
pub use runner::{build_scenario, Output, Runner, Scenario};
