//! Command-line front end: configuration, input formats and the
//! subcommand implementations behind the `gtodd` binary.

pub mod bench;
pub mod commands;
pub mod config;
pub mod files;

pub use commands::{cmd_ct, cmd_ehrhart, cmd_ilp, cmd_todd, IlpInput, Report};
pub use config::{exit_code, RunConfig};
