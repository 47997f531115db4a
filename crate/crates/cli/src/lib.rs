//! Batch front end for the partition oracle: config handling and the
//! subcommands behind the `po` binary.

pub mod commands;
pub mod config;

pub use commands::{CensusKind, CensusOptions, FreeChoice, Outcome, EXIT_ERROR, EXIT_OK, EXIT_REJECT};
pub use config::RunConfig;
