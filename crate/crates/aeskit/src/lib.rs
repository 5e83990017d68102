//! File formats, IO and the command-line pipeline around `aeskit-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod report;
pub mod synth;

pub use error::{Category, CliError, CliResult};
