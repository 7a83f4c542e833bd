//! Problem files, reports and command dispatch for the `spectral` binary.

pub mod commands;
pub mod problem;
pub mod report;

pub use commands::{execute, run, Cli, Command, Family};
pub use problem::ProblemFile;
pub use report::Report;
