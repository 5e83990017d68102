//! Command-line front end. Every subcommand resolves its configuration from
//! an optional JSON file overlaid with flags, echoes the result next to its
//! outputs, and maps failures onto categorized exit codes.

mod args;
mod combine;
mod data;
mod learn;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub use args::{Cli, Command};

use crate::error::{CliError, CliResult};
use crate::io::{read_json, write_json};

pub fn version_string() -> String {
    format!(
        "aeskit {} (formats: {}, embeddings {}, mlp {}, features {}, prng {})",
        env!("CARGO_PKG_VERSION"),
        aeskit_core::FORMAT_VERSION,
        aeskit_core::embed::EMBEDDING_FORMAT,
        aeskit_core::mlp::MLP_FORMAT,
        aeskit_core::text::handcrafted::HANDCRAFTED_VERSION,
        aeskit_core::rng::PRNG_NAME,
    )
}

/// Parse `argv` (program name first), execute, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if cli.version {
        println!("{}", version_string());
        return 0;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (try --help)");
        return 2;
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 4;
        }
    };
    match pool.install(|| dispatch(command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.category().exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Split(a) => data::split(a),
        Command::Stats(a) => data::stats(a),
        Command::Featurize(a) => data::featurize(a),
        Command::EmbedConcat(a) => data::embed_concat(a),
        Command::SynthCorpus(a) => data::synth_corpus(a),
        Command::SynthEmbeddings(a) => data::synth_embeddings(a),
        Command::Train(t) => learn::train(t),
        Command::Predict(a) => learn::predict(a),
        Command::Ensemble(e) => combine::ensemble(e),
        Command::Evaluate(a) => combine::evaluate(a),
        Command::Report(a) => combine::report(a),
    }
}

/// File config or defaults; flags are overlaid by the caller.
fn base_config<C: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<C> {
    match path {
        Some(p) => read_json(p),
        None => Ok(C::default()),
    }
}

fn require(path: &Path, flag: &str) -> CliResult<()> {
    if path.as_os_str().is_empty() {
        return Err(CliError::Usage(format!("missing required {flag} (flag or config field)")));
    }
    Ok(())
}

/// Echo location for file outputs: `dir/name.ext` becomes `dir/name.config.json`.
fn echo_path_for_file(out: &Path) -> PathBuf {
    out.with_extension("config.json")
}

fn echo<C: Serialize>(path: &Path, config: &C) -> CliResult<()> {
    write_json(path, config)
}
