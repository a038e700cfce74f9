//! Command-line front end for `qng-core`: a rayon executor, an on-disk
//! threshold cache, JSON/CSV artifacts, density-matrix files and the
//! certification report.

pub mod artifact;
pub mod cache;
pub mod certify;
pub mod cli;
pub mod config;
mod error;
pub mod exec;
pub mod grid;
pub mod run;
pub mod state_file;

pub use error::{CliError, ExitCode};
