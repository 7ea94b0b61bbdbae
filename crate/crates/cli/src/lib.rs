//! Command-line companion to `lexaug-core`: file formats, run directories,
//! definition fetching with an on-disk cache, report emission, and the
//! `lexaug` binary's subcommands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod defs_client;
pub mod error;
pub mod report;
pub mod runs;
pub mod sample_assets;

pub use error::{CliError, Result};
