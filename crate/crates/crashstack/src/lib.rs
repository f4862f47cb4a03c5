//! File formats, figures and the command-line interface around
//! `crashstack-core`: panel CSV loading, JSON model bundles, report tables,
//! SVG charts and the `crashstack` subcommands.

pub mod cli;
pub mod config;
pub mod io;
pub mod svg;
pub mod tables;

pub use cli::{execute, Cli, CliError, RunOutput, StackBundle};
pub use config::RunConfig;
pub use io::{load_panel, write_panel, PanelSchema};
