//! Command-line front end: argument resolution, verb dispatch and the
//! built-in selftest.

pub mod config;
pub mod error;
pub mod run;
pub mod selftest;

pub use config::{parse_args, RunConfig, Verb};
pub use error::CliError;
pub use run::{execute, run};
