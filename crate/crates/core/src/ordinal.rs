//! Cumulative-threshold encoding of the six score levels.
//!
//! Score `s` becomes five binary targets "score > k" for k = 1..=5, i.e. the
//! first `s - 1` entries are 1. Decoding counts entries strictly above 0.5;
//! non-monotone vectors are decoded by the same count rule.

use crate::{Error, Result, N_CLASSES};

pub const N_THRESHOLDS: usize = N_CLASSES - 1;

pub type OrdinalCode = [f64; N_THRESHOLDS];

pub fn encode(score: u8) -> Result<OrdinalCode> {
    if !(1..=N_CLASSES as u8).contains(&score) {
        return Err(Error::ScoreOutOfRange { score: score.into(), context: Default::default() });
    }
    let mut code = [0.0; N_THRESHOLDS];
    for slot in code.iter_mut().take(usize::from(score - 1)) {
        *slot = 1.0;
    }
    Ok(code)
}

pub fn decode(probs: &OrdinalCode) -> u8 {
    1 + probs.iter().filter(|&&p| p > 0.5).count() as u8
}

/// Turn threshold probabilities into a distribution over the six scores.
///
/// Cumulative probabilities are made non-increasing with a running minimum,
/// then differenced: `P(1) = 1 - q1`, `P(k) = q(k-1) - qk`, `P(6) = q5`.
pub fn to_distribution(probs: &OrdinalCode) -> [f64; N_CLASSES] {
    let mut q = [0.0; N_THRESHOLDS];
    let mut running = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        running = running.min(p.clamp(0.0, 1.0));
        q[k] = running;
    }
    let mut dist = [0.0; N_CLASSES];
    dist[0] = 1.0 - q[0];
    for k in 1..N_THRESHOLDS {
        dist[k] = q[k - 1] - q[k];
    }
    dist[N_CLASSES - 1] = q[N_THRESHOLDS - 1];
    dist
}
