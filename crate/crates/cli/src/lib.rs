//! Command-line front end: load effects, POMs and lattice models from JSON,
//! run the checkers and scans, emit text, JSON or CSV reports.
//!
//! Exit codes: 0 success, 1 input error, 2 finding.

pub mod args;
pub mod commands;

pub use args::{Cli, Command, Format};
pub use commands::{run, CliError, Report};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_FINDING: u8 = 2;
