//! Configuration, run loop, on-disk outputs and verification checks for the
//! director field simulator.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod verify;

pub use config::{Overrides, RunConfig};
pub use error::{ConfigError, RunError};
pub use runner::{run, simulate, RunSummary};
