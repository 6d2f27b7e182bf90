//! File formats, configuration and the command line for the delayed-flux model.
//!
//! The numerics live in [`delayflux_core`]; this crate adds TOML run
//! configs, CSV/JSON outputs, a parallel stability sweep and the
//! `delayflux` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod sweep;
pub mod validate;

pub use delayflux_core as core;
pub use error::{CliError, Result};
