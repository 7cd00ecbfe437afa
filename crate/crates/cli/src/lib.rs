//! Front end for the `prony-bath` library: configuration, commands and
//! deterministic JSON/CSV output.

pub mod commands;
pub mod config;
pub mod failure;
pub mod output;
pub mod selftest;

pub use commands::{cmd_compare, cmd_cost, cmd_fit, cmd_spectrum, read_series, SpectrumPart};
pub use config::RunConfig;
pub use failure::{CliError, FailureKind};
pub use output::{write_artifacts, Artifact};
pub use selftest::run_selftest;
