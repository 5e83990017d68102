//! Per-sample gradients and diagonal hessians of the boosting losses.
//!
//! Raw scores are row-major `n x K` with `K = objective.n_outputs()`.
//! * softmax cross-entropy: `g_k = p_k - y_k`, `h_k = p_k (1 - p_k)`;
//! * ordinal: independent logistic losses on the five "score > k" targets;
//! * squared error `(s - y)^2 / 2` against the score value: `g = s - y`, `h = 1`.

use alloc::vec;
use alloc::vec::Vec;

use super::Objective;
use crate::prediction::{sigmoid, softmax};
use crate::{ordinal, Error, Result, N_CLASSES};

/// Hessians are floored here so leaf denominators stay positive.
const MIN_HESS: f64 = 1e-16;

fn check(objective: Objective, raw: &[f64], labels: &[u8]) -> Result<()> {
    let k = objective.n_outputs();
    if raw.len() != labels.len() * k {
        return Err(Error::Shape { expected: labels.len() * k, got: raw.len() });
    }
    if let Some(&bad) = labels.iter().find(|&&l| !(1..=N_CLASSES as u8).contains(&l)) {
        return Err(Error::ScoreOutOfRange { score: bad.into(), context: Default::default() });
    }
    Ok(())
}

pub fn grad_hess(objective: Objective, raw: &[f64], labels: &[u8]) -> Result<(Vec<f64>, Vec<f64>)> {
    check(objective, raw, labels)?;
    let k = objective.n_outputs();
    let mut g = vec![0.0; raw.len()];
    let mut h = vec![0.0; raw.len()];
    for (i, &label) in labels.iter().enumerate() {
        let r = &raw[i * k..(i + 1) * k];
        let (gi, hi) = (&mut g[i * k..(i + 1) * k], &mut h[i * k..(i + 1) * k]);
        match objective {
            Objective::MulticlassSoftmax => {
                let p = softmax(r);
                for c in 0..k {
                    let y = if c + 1 == usize::from(label) { 1.0 } else { 0.0 };
                    gi[c] = p[c] - y;
                    hi[c] = (p[c] * (1.0 - p[c])).max(MIN_HESS);
                }
            }
            Objective::OrdinalBinary => {
                let target = ordinal::encode(label)?;
                for c in 0..k {
                    let p = sigmoid(r[c]);
                    gi[c] = p - target[c];
                    hi[c] = (p * (1.0 - p)).max(MIN_HESS);
                }
            }
            Objective::SquaredError => {
                gi[0] = r[0] - f64::from(label);
                hi[0] = 1.0;
            }
        }
    }
    Ok((g, h))
}

/// log(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// Loss of a single sample.
pub fn sample_loss(objective: Objective, raw: &[f64], label: u8) -> f64 {
    match objective {
        Objective::MulticlassSoftmax => {
            let m = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + libm::log(raw.iter().map(|&r| libm::exp(r - m)).sum::<f64>());
            lse - raw[usize::from(label) - 1]
        }
        Objective::OrdinalBinary => {
            let below = usize::from(label) - 1;
            raw.iter()
                .enumerate()
                .map(|(c, &x)| if c < below { softplus(-x) } else { softplus(x) })
                .sum()
        }
        Objective::SquaredError => {
            let d = raw[0] - f64::from(label);
            0.5 * d * d
        }
    }
}

/// Mean loss over all samples.
pub fn loss(objective: Objective, raw: &[f64], labels: &[u8]) -> Result<f64> {
    check(objective, raw, labels)?;
    if labels.is_empty() {
        return Ok(0.0);
    }
    let k = objective.n_outputs();
    let total: f64 = labels.iter().enumerate().map(|(i, &l)| sample_loss(objective, &raw[i * k..(i + 1) * k], l)).sum();
    Ok(total / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StageRng;

    #[test]
    fn uniform_softmax_gradient() {
        let (g, h) = grad_hess(Objective::MulticlassSoftmax, &[0.0; 6], &[2]).unwrap();
        for c in 0..6 {
            let expect = if c == 1 { 1.0 / 6.0 - 1.0 } else { 1.0 / 6.0 };
            assert!((g[c] - expect).abs() < 1e-15);
            assert!((h[c] - 5.0 / 36.0).abs() < 1e-15);
        }
    }

    #[test]
    fn squared_error_zero_at_target() {
        let (g, h) = grad_hess(Objective::SquaredError, &[4.0], &[4]).unwrap();
        assert_eq!((g[0], h[0]), (0.0, 1.0));
    }

    #[test]
    fn label_out_of_range() {
        assert!(grad_hess(Objective::SquaredError, &[1.0], &[9]).is_err());
        assert!(grad_hess(Objective::MulticlassSoftmax, &[0.0; 5], &[1]).is_err());
    }

    /// Central differences of the loss against `g`, and of `g` against `h`.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = StageRng::new(11, 0);
        let step = 1e-5;
        for objective in [Objective::MulticlassSoftmax, Objective::OrdinalBinary, Objective::SquaredError] {
            let k = objective.n_outputs();
            for _ in 0..200 {
                let raw: Vec<f64> = (0..k).map(|_| rng.uniform(-3.0, 3.0)).collect();
                let label = 1 + rng.below(6) as u8;
                let (g, h) = grad_hess(objective, &raw, &[label]).unwrap();
                for c in 0..k {
                    let mut up = raw.clone();
                    let mut down = raw.clone();
                    up[c] += step;
                    down[c] -= step;
                    let fd = (sample_loss(objective, &up, label) - sample_loss(objective, &down, label)) / (2.0 * step);
                    let tol = 1e-6 * g[c].abs().max(1e-3);
                    assert!((fd - g[c]).abs() <= tol, "{objective:?} g fd={fd} analytic={}", g[c]);
                    let (gu, _) = grad_hess(objective, &up, &[label]).unwrap();
                    let (gd, _) = grad_hess(objective, &down, &[label]).unwrap();
                    let fdh = (gu[c] - gd[c]) / (2.0 * step);
                    assert!((fdh - h[c]).abs() <= 1e-6 * h[c].abs().max(1e-3), "{objective:?} h");
                }
            }
        }
    }
}
