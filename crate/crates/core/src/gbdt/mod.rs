//! Histogram gradient-boosted decision trees.
//!
//! Features are discretised once into at most 256 bins per column. Each
//! boosting round computes per-sample gradients and hessians, optionally
//! applies gradient-based one-side sampling, draws a column subset per tree
//! and grows one tree per model output either leaf-wise (largest gain first)
//! or depth-wise (level order). Leaf values are shrunken Newton steps
//! `-G / (H + lambda) * learning_rate`.

pub mod binning;
pub mod booster;
pub mod config;
pub mod objective;
pub mod split;
pub mod tree;

pub use binning::{build_bins, BinnedMatrix, FeatureBins, HistogramBinning};
pub use booster::{predict, train, Forest, RoundLog};
pub use config::{GbdtConfig, Goss, Growth, Objective, Preset};
pub use objective::{grad_hess, loss};
pub use split::{find_best_split, SplitCandidate, SplitParams};
pub use tree::{Node, Tree};
