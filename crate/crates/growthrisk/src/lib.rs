//! Command-line front end, file formats and parallel drivers for
//! `growthrisk-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod format;
pub mod parallel;
pub mod verify;

pub use cli::run;
pub use error::CliError;
