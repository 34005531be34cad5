//! Command-line front end for the piecewise-linear IFS toolkit.
//!
//! Three layers: [`config`] parses and validates JSON system descriptions
//! (piecewise-linear or graph-directed, with optional exact-rational
//! numbers), [`dispatch`] maps subcommands and flags onto the library and
//! prints human summaries, and [`report`] renders deterministic JSON run
//! reports and CSV tables.

#![deny(missing_docs)]

pub mod config;
pub mod dispatch;
pub mod report;

pub use config::{ConfigError, SystemConfig};
pub use dispatch::{run, Cli, CliError};
pub use report::RunReport;
