//! File formats, configuration and the command-line driver for `nlcurv-core`.

pub mod config;
pub mod io;
pub mod run;

pub use config::{parse_config, RunConfig, UsageError};
pub use run::{run, RunError};
