//! Command-line front end of `gnc-core`: process documents, the example
//! registry and the command implementations behind the `gnc` binary.

pub mod commands;
pub mod document;
pub mod error;
pub mod registry;

pub use error::{exit, CliError};
