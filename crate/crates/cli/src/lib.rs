//! Front end for `dampwave-core`: a TOML run configuration and one function
//! per subcommand.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command, Outcome, Problem, Status};
pub use config::{Format, RunConfig};
pub use error::CliError;
