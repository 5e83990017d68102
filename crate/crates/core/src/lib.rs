//! Allocation-only core of the essay scoring toolkit.
//!
//! Everything in here is pure computation over in-memory values: corpus
//! validation and splitting, text features, embedding matrices, the
//! histogram GBDT and MLP learners, ordinal codes, ensembling and QWK.
//! File formats, IO and the command line live in the `aeskit` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod embed;
pub mod ensemble;
pub mod error;
pub mod gbdt;
pub mod matrix;
pub mod metrics;
pub mod mlp;
pub mod ordinal;
pub mod prediction;
pub mod rng;
pub mod text;

pub use error::{Error, Result};
pub use matrix::{Column, FeatureMatrix};

/// Number of score levels on the rubric (scores 1..=6).
pub const N_CLASSES: usize = 6;

/// Version tag written into every artifact produced from this crate.
pub const FORMAT_VERSION: &str = "aeskit/1";
