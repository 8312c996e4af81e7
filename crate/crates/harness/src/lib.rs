//! Experiment harness for the `sacwick-core` simulator: run configurations,
//! Monte-Carlo ε-sweeps, file formats and report emission. The `sacwick`
//! binary wraps these in a command-line interface.

pub mod config;
mod error;
pub mod io;
pub mod report;
pub mod sweep;

pub use error::{HarnessError, Result};
