//! File formats, configuration, timing and parallel training around
//! [`dynvgae_core`], plus the command implementations behind the `dynvgae`
//! binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod runner;

pub use config::{DataSource, RunConfig, Settings, Task};
pub use error::{AppError, Result};
