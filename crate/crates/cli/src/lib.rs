//! Configuration, orchestration and file output for the `potwell` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod init;
pub mod output;
pub mod store;
pub mod svg;

pub use commands::Overrides;
pub use config::RunConfig;
pub use error::{CliError, Result};
