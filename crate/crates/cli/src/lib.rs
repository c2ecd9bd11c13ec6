//! Library side of the `macsim` command-line tool: configuration loading,
//! manifests, CSV contracts and the three subcommands.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod format;
pub mod manifest;

pub use commands::{cmd_analytic, cmd_compare, cmd_simulate, Outcome, Overrides};
pub use config::{load_config, parse_config, Config};
pub use error::CliError;
