//! Command-line pipeline around the `npnkit` library: scenario files,
//! subcommands and reproducible output directories.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;

pub use error::{CliError, CliResult};
