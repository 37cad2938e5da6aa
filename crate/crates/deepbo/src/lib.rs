//! File formats, experiment configuration and the trial runner for
//! [`deepbo_core`]. The `deepbo` binary wraps these behind `gen-benchmark`,
//! `run` and `report` subcommands.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod table_io;

pub use error::{Error, Result};
