//! Quadratic weighted kappa and the evaluation report built around it.
//!
//! With weights `w_ij = (i-j)^2 / (N-1)^2`, observed counts `O` and the
//! chance matrix `E_ij = r_i c_j / n` (row/column marginals scaled to `O`'s
//! total), `kappa = 1 - sum(w O) / sum(w E)`.
//!
//! The constant `(N-1)^2` cancels, so both sums are taken in exact integer
//! arithmetic: `kappa = 1 - n * sum(d^2 O) / sum(d^2 r c)`. That makes the
//! value bit-identical under argument swap and under any reordering of pairs.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, N_CLASSES};

pub type Confusion = [[u64; N_CLASSES]; N_CLASSES];

/// Quadratic disagreement weight between score levels `i` and `j` (1-based).
pub fn qwk_weight(i: usize, j: usize, n_levels: usize) -> f64 {
    let d = i as f64 - j as f64;
    let span = (n_levels - 1) as f64;
    d * d / (span * span)
}

fn check_pairs(truth: &[u8], pred: &[u8]) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(Error::Shape { expected: truth.len(), got: pred.len() });
    }
    if truth.is_empty() {
        return Err(Error::invalid("no labels to compare"));
    }
    for &s in truth.iter().chain(pred) {
        if !(1..=N_CLASSES as u8).contains(&s) {
            return Err(Error::ScoreOutOfRange { score: s.into(), context: Default::default() });
        }
    }
    Ok(())
}

/// Joint counts: entry `[i][j]` counts essays with truth `i+1` predicted `j+1`.
pub fn confusion(truth: &[u8], pred: &[u8]) -> Result<Confusion> {
    check_pairs(truth, pred)?;
    let mut m = [[0u64; N_CLASSES]; N_CLASSES];
    for (&t, &p) in truth.iter().zip(pred) {
        m[usize::from(t - 1)][usize::from(p - 1)] += 1;
    }
    Ok(m)
}

fn qwk_from_confusion(m: &Confusion) -> Result<f64> {
    let mut rows = [0u64; N_CLASSES];
    let mut cols = [0u64; N_CLASSES];
    let mut observed: u128 = 0;
    for i in 0..N_CLASSES {
        for j in 0..N_CLASSES {
            let d = i.abs_diff(j) as u128;
            observed += d * d * u128::from(m[i][j]);
            rows[i] += m[i][j];
            cols[j] += m[i][j];
        }
    }
    let n: u64 = rows.iter().sum();
    let mut expected: u128 = 0;
    for i in 0..N_CLASSES {
        for j in 0..N_CLASSES {
            let d = i.abs_diff(j) as u128;
            expected += d * d * u128::from(rows[i]) * u128::from(cols[j]);
        }
    }
    if expected == 0 {
        return Err(Error::DegenerateQwk);
    }
    Ok(1.0 - (observed * u128::from(n)) as f64 / expected as f64)
}

/// Quadratic weighted kappa between two label sequences over scores 1..=6.
pub fn qwk(truth: &[u8], pred: &[u8]) -> Result<f64> {
    qwk_from_confusion(&confusion(truth, pred)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub qwk: f64,
    pub accuracy: f64,
    /// Row-major, rows are truth.
    pub confusion: Confusion,
    pub truth_counts: [u64; N_CLASSES],
    pub pred_counts: [u64; N_CLASSES],
    pub n_evaluated: u64,
}

pub fn evaluate(truth: &[u8], pred: &[u8]) -> Result<EvalReport> {
    let confusion = confusion(truth, pred)?;
    let qwk = qwk_from_confusion(&confusion)?;
    let mut truth_counts = [0u64; N_CLASSES];
    let mut pred_counts = [0u64; N_CLASSES];
    let mut trace = 0;
    for i in 0..N_CLASSES {
        trace += confusion[i][i];
        for j in 0..N_CLASSES {
            truth_counts[i] += confusion[i][j];
            pred_counts[j] += confusion[i][j];
        }
    }
    let n = truth.len() as u64;
    Ok(EvalReport {
        qwk,
        accuracy: trace as f64 / n as f64,
        confusion,
        truth_counts,
        pred_counts,
        n_evaluated: n,
    })
}

/// Fraction of positions where the labels agree.
pub fn accuracy(truth: &[u8], pred: &[u8]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = truth.iter().zip(pred).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// QWK that maps a degenerate denominator to `None` instead of an error;
/// used where model selection must keep going.
pub fn qwk_opt(truth: &[u8], pred: &[u8]) -> Option<f64> {
    qwk(truth, pred).ok()
}

#[doc(hidden)]
pub fn histogram(labels: &[u8]) -> Vec<u64> {
    let mut h = alloc::vec![0u64; N_CLASSES];
    for &l in labels {
        h[usize::from(l - 1)] += 1;
    }
    h
}
