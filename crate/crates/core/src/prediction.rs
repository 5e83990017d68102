//! Model outputs shared by the learners and the ensemble layer.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::ordinal::{self, OrdinalCode};
use crate::N_CLASSES;

/// Probability vector over scores 1..=6.
pub type ScoreDistribution = [f64; N_CLASSES];

/// Index of the largest entry plus one; ties go to the lower score.
pub fn argmax_label(dist: &ScoreDistribution) -> u8 {
    let mut best = 0;
    for k in 1..N_CLASSES {
        if dist[k] > dist[best] {
            best = k;
        }
    }
    best as u8 + 1
}

/// Numerically stable softmax of six logits.
pub fn softmax(logits: &[f64]) -> ScoreDistribution {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; N_CLASSES];
    let mut total = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = libm::exp(l - m);
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
    out
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Continuous score to a label by rounding and clamping into 1..=6.
pub fn round_label(score: f64) -> u8 {
    libm::round(score).clamp(1.0, N_CLASSES as f64) as u8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Prediction {
    Distribution(Vec<ScoreDistribution>),
    /// Per-threshold probabilities "score > k".
    Ordinal(Vec<OrdinalCode>),
    Continuous(Vec<f64>),
}

impl Prediction {
    pub fn len(&self) -> usize {
        match self {
            Prediction::Distribution(v) => v.len(),
            Prediction::Ordinal(v) => v.len(),
            Prediction::Continuous(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Hard labels: argmax, threshold count, or rounded score.
    pub fn labels(&self) -> Vec<u8> {
        match self {
            Prediction::Distribution(v) => v.iter().map(argmax_label).collect(),
            Prediction::Ordinal(v) => v.iter().map(ordinal::decode).collect(),
            Prediction::Continuous(v) => v.iter().map(|&s| round_label(s)).collect(),
        }
    }

    /// Probability vectors, when the model produces them.
    pub fn distributions(&self) -> Option<Vec<ScoreDistribution>> {
        match self {
            Prediction::Distribution(v) => Some(v.clone()),
            Prediction::Ordinal(v) => Some(v.iter().map(ordinal::to_distribution).collect()),
            Prediction::Continuous(_) => None,
        }
    }
}
