//! Combining model outputs: convex probability merges with a QWK-driven
//! weight search, majority voting over labels, and cut-point fitting for
//! continuous scores.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::metrics::qwk_opt;
use crate::prediction::{argmax_label, ScoreDistribution};
use crate::{Error, Result, N_CLASSES};

/// Convex model weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MergeWeights(Vec<f64>);

impl MergeWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("at least one weight is required"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(alloc::vec![1.0 / m as f64; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for MergeWeights {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MergeWeights> for Vec<f64> {
    fn from(w: MergeWeights) -> Self {
        w.0
    }
}

fn check_aligned<T>(models: &[Vec<T>]) -> Result<usize> {
    let n = models.first().map_or(0, Vec::len);
    for m in models {
        if m.len() != n {
            return Err(Error::Shape { expected: n, got: m.len() });
        }
    }
    Ok(n)
}

/// Elementwise convex combination of per-model distributions.
pub fn weighted_merge(models: &[Vec<ScoreDistribution>], weights: &MergeWeights) -> Result<Vec<ScoreDistribution>> {
    if models.len() != weights.0.len() {
        return Err(Error::Shape { expected: models.len(), got: weights.0.len() });
    }
    let n = check_aligned(models)?;
    Ok((0..n)
        .map(|i| {
            let mut out = [0.0; N_CLASSES];
            for (m, &w) in models.iter().zip(&weights.0) {
                for (o, p) in out.iter_mut().zip(&m[i]) {
                    *o += w * p;
                }
            }
            out
        })
        .collect())
}

pub fn merged_labels(models: &[Vec<ScoreDistribution>], weights: &MergeWeights) -> Result<Vec<u8>> {
    Ok(weighted_merge(models, weights)?.iter().map(argmax_label).collect())
}

/// Search space for [`weight_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightGrid {
    /// Starting points, each a full weight vector.
    pub coarse: Vec<Vec<f64>>,
    /// Hill-climb step moving weight between pairs of models; `None` disables it.
    pub refine_step: Option<f64>,
    /// No weight is refined below this floor.
    pub min_weight: f64,
}

impl WeightGrid {
    /// Two models: w1 over {0.3, 0.4, 0.5, 0.6, 0.7}, refined at 0.05.
    /// More models: the 0.1 lattice with every weight at least 0.1.
    pub fn default_for(m: usize) -> Self {
        let coarse = if m == 2 {
            [3, 4, 5, 6, 7].iter().map(|&k| alloc::vec![k as f64 / 10.0, (10 - k) as f64 / 10.0]).collect()
        } else {
            let mut out = Vec::new();
            lattice(m, 10, 1, &mut Vec::new(), &mut out);
            out
        };
        Self { coarse, refine_step: Some(0.05), min_weight: 0.05 }
    }

    /// Two-model grid from explicit values of w1.
    pub fn from_first_weights(values: &[f64], refine_step: Option<f64>) -> Self {
        Self { coarse: values.iter().map(|&w| alloc::vec![w, 1.0 - w]).collect(), refine_step, min_weight: 0.05 }
    }
}

/// Compositions of `total` into `m` parts, each at least `floor`, in tenths.
fn lattice(m: usize, total: usize, floor: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
    if prefix.len() + 1 == m {
        if total >= floor {
            let mut w: Vec<f64> = prefix.iter().map(|&k| k as f64 / 10.0).collect();
            w.push(total as f64 / 10.0);
            out.push(w);
        }
        return;
    }
    let remaining = m - prefix.len() - 1;
    for k in floor..=total.saturating_sub(remaining * floor) {
        prefix.push(k);
        lattice(m, total - k, floor, prefix, out);
        prefix.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightScore {
    pub weights: Vec<f64>,
    /// `None` when the merged labels give a degenerate QWK.
    pub qwk: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSearchReport {
    pub best: MergeWeights,
    pub best_qwk: f64,
    /// Every evaluated point in evaluation order.
    pub table: Vec<WeightScore>,
}

fn snap(w: f64) -> f64 {
    libm::round(w * 1e9) / 1e9
}

fn distance_to_uniform(w: &[f64]) -> f64 {
    let u = 1.0 / w.len() as f64;
    w.iter().map(|x| (x - u) * (x - u)).sum()
}

/// Strict preference: higher QWK, then closer to uniform, then lexicographically smaller.
fn better(a: &WeightScore, b: &WeightScore) -> bool {
    match (a.qwk, b.qwk) {
        (Some(x), Some(y)) if x != y => return x > y,
        (Some(_), None) => return true,
        (None, Some(_)) => return false,
        _ => {}
    }
    let (da, db) = (distance_to_uniform(&a.weights), distance_to_uniform(&b.weights));
    if (da - db).abs() > 1e-12 {
        return da < db;
    }
    a.weights < b.weights
}

/// Grid evaluation of validation QWK followed by pairwise hill-climbing
/// that moves only on strict QWK improvement.
pub fn weight_search(models: &[Vec<ScoreDistribution>], labels: &[u8], grid: &WeightGrid) -> Result<WeightSearchReport> {
    let n = check_aligned(models)?;
    if n != labels.len() {
        return Err(Error::Shape { expected: n, got: labels.len() });
    }
    if grid.coarse.is_empty() {
        return Err(Error::invalid("weight grid is empty"));
    }
    let mut table: Vec<WeightScore> = Vec::new();
    let eval = |w: Vec<f64>, table: &mut Vec<WeightScore>| -> Result<WeightScore> {
        let w: Vec<f64> = w.into_iter().map(snap).collect();
        if let Some(hit) = table.iter().find(|s| s.weights == w) {
            return Ok(hit.clone());
        }
        let qwk = qwk_opt(labels, &merged_labels(models, &MergeWeights::new(w.clone())?)?);
        let score = WeightScore { weights: w, qwk };
        table.push(score.clone());
        Ok(score)
    };

    let mut best: Option<WeightScore> = None;
    for w in &grid.coarse {
        let s = eval(w.clone(), &mut table)?;
        if best.as_ref().map_or(true, |b| better(&s, b)) {
            best = Some(s);
        }
    }
    let mut best = best.expect("grid is nonempty");

    if let (Some(step), Some(mut current_qwk)) = (grid.refine_step, best.qwk) {
        let m = best.weights.len();
        loop {
            let mut step_best: Option<WeightScore> = None;
            for from in 0..m {
                for to in 0..m {
                    if from == to || best.weights[from] - step < grid.min_weight - 1e-12 {
                        continue;
                    }
                    let mut w = best.weights.clone();
                    w[from] -= step;
                    w[to] += step;
                    let s = eval(w, &mut table)?;
                    if step_best.as_ref().map_or(true, |b| better(&s, b)) {
                        step_best = Some(s);
                    }
                }
            }
            match step_best {
                Some(s) if s.qwk.is_some_and(|q| q > current_qwk) => {
                    current_qwk = s.qwk.unwrap();
                    best = s;
                }
                _ => break,
            }
        }
    }

    let best_qwk = best.qwk.ok_or(Error::DegenerateQwk)?;
    Ok(WeightSearchReport { best: MergeWeights::new(best.weights)?, best_qwk, table })
}

/// Modal label per essay; ties go to the tied label nearest the mean vote,
/// then to the lower label.
pub fn hard_vote(models: &[Vec<u8>]) -> Result<Vec<u8>> {
    if models.is_empty() {
        return Err(Error::invalid("no label vectors to vote over"));
    }
    let n = check_aligned(models)?;
    Ok((0..n)
        .map(|i| {
            let mut counts = [0usize; 256];
            let mut sum = 0.0;
            for m in models {
                counts[usize::from(m[i])] += 1;
                sum += f64::from(m[i]);
            }
            let mean = sum / models.len() as f64;
            let top = *counts.iter().max().unwrap();
            (0..=255u8)
                .filter(|&l| counts[usize::from(l)] == top)
                .min_by(|&a, &b| {
                    let (da, db) = ((f64::from(a) - mean).abs(), (f64::from(b) - mean).abs());
                    da.partial_cmp(&db).unwrap().then(a.cmp(&b))
                })
                .unwrap()
        })
        .collect())
}

/// Strictly increasing cut points mapping a continuous score to 1..=6.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 5]", into = "[f64; 5]")]
pub struct ThresholdSet([f64; N_CLASSES - 1]);

impl ThresholdSet {
    pub const INITIAL: ThresholdSet = ThresholdSet([1.5, 2.5, 3.5, 4.5, 5.5]);

    pub fn new(cuts: [f64; N_CLASSES - 1]) -> Result<Self> {
        if cuts.iter().any(|c| !c.is_finite()) || cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("cut points must be finite and strictly increasing"));
        }
        Ok(Self(cuts))
    }

    pub fn cuts(&self) -> &[f64; N_CLASSES - 1] {
        &self.0
    }

    /// One plus the number of cuts strictly below `score`.
    pub fn label(&self, score: f64) -> u8 {
        1 + self.0.iter().filter(|&&c| c < score).count() as u8
    }
}

impl Default for ThresholdSet {
    fn default() -> Self {
        Self::INITIAL
    }
}

impl TryFrom<[f64; 5]> for ThresholdSet {
    type Error = Error;
    fn try_from(c: [f64; 5]) -> Result<Self> {
        Self::new(c)
    }
}

impl From<ThresholdSet> for [f64; 5] {
    fn from(t: ThresholdSet) -> Self {
        t.0
    }
}

pub fn apply_thresholds(scores: &[f64], cuts: &ThresholdSet) -> Vec<u8> {
    scores.iter().map(|&s| cuts.label(s)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub thresholds: ThresholdSet,
    pub initial_qwk: f64,
    pub qwk: f64,
    pub sweeps: usize,
}

/// QWK of thresholded scores; a degenerate confusion scores as -inf so it
/// never wins but does not abort the search.
fn threshold_qwk(scores: &[f64], labels: &[u8], cuts: &[f64; 5]) -> f64 {
    let t = ThresholdSet(*cuts);
    qwk_opt(labels, &apply_thresholds(scores, &t)).unwrap_or(f64::NEG_INFINITY)
}

/// Cyclic coordinate ascent over c1..c5 from the integer midpoints. Each
/// cut tries every midpoint between adjacent distinct scores that keeps the
/// order strict and moves only on strict improvement; stops after a sweep
/// with no move.
pub fn fit_thresholds(scores: &[f64], labels: &[u8]) -> Result<ThresholdFit> {
    if scores.len() != labels.len() {
        return Err(Error::Shape { expected: labels.len(), got: scores.len() });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("score at row {i}")));
    }
    let mut distinct_labels = labels.to_vec();
    distinct_labels.sort_unstable();
    distinct_labels.dedup();
    let mut unique = scores.to_vec();
    unique.sort_by(f64::total_cmp);
    unique.dedup();
    if distinct_labels.len() < 2 || unique.len() < 2 {
        return Err(Error::DegenerateQwk);
    }
    let candidates: Vec<f64> = unique.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect();

    let mut cuts = *ThresholdSet::INITIAL.cuts();
    let initial_qwk = threshold_qwk(scores, labels, &cuts);
    let mut current = initial_qwk;
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut moved = false;
        for k in 0..cuts.len() {
            let lo = if k == 0 { f64::NEG_INFINITY } else { cuts[k - 1] };
            let hi = if k + 1 == cuts.len() { f64::INFINITY } else { cuts[k + 1] };
            let mut best = (current, cuts[k]);
            for &c in candidates.iter().filter(|&&c| c > lo && c < hi) {
                let mut trial = cuts;
                trial[k] = c;
                let q = threshold_qwk(scores, labels, &trial);
                if q > best.0 {
                    best = (q, c);
                }
            }
            if best.0 > current {
                current = best.0;
                cuts[k] = best.1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    if !current.is_finite() {
        return Err(Error::DegenerateQwk);
    }
    Ok(ThresholdFit { thresholds: ThresholdSet(cuts), initial_qwk, qwk: current, sweeps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const E1: ScoreDistribution = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    const E2: ScoreDistribution = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0];

    #[test]
    fn merge_arithmetic() {
        let w = MergeWeights::new(vec![0.3, 0.7]).unwrap();
        let out = weighted_merge(&[vec![E1], vec![E2]], &w).unwrap();
        assert!((out[0][0] - 0.3).abs() < 1e-15 && (out[0][1] - 0.7).abs() < 1e-15);
        assert_eq!(argmax_label(&out[0]), 2);
        let first = weighted_merge(&[vec![E1], vec![E2]], &MergeWeights::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(first[0], E1);
    }

    #[test]
    fn merge_errors() {
        let w = MergeWeights::uniform(3).unwrap();
        assert!(weighted_merge(&[vec![E1], vec![E2]], &w).is_err());
        assert!(weighted_merge(&[vec![E1], vec![]], &MergeWeights::uniform(2).unwrap()).is_err());
        assert!(MergeWeights::new(vec![0.5, 0.6]).is_err());
        assert!(MergeWeights::new(vec![-0.5, 1.5]).is_err());
    }

    #[test]
    fn identical_models_tie_to_uniform() {
        let labels: Vec<u8> = (0..30).map(|i| (i % 6) as u8 + 1).collect();
        let dists: Vec<ScoreDistribution> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let mut d = [0.02; 6];
                d[usize::from(if i % 4 == 0 { 1 + l % 6 } else { l }) - 1] = 0.9;
                d
            })
            .collect();
        let report = weight_search(&[dists.clone(), dists], &labels, &WeightGrid::default_for(2)).unwrap();
        assert_eq!(report.best.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn single_point_grid() {
        let labels = [1, 2, 3];
        let d = vec![E1, E2, [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]];
        let report = weight_search(&[d.clone(), d], &labels, &WeightGrid::from_first_weights(&[0.5], None)).unwrap();
        assert_eq!(report.best.as_slice(), &[0.5, 0.5]);
        assert_eq!(report.table.len(), 1);
    }

    #[test]
    fn three_model_lattice() {
        let g = WeightGrid::default_for(3);
        assert_eq!(g.coarse.len(), 36);
        assert!(g.coarse.iter().all(|w| (w.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn votes() {
        assert_eq!(hard_vote(&[vec![3], vec![3], vec![4]]).unwrap(), vec![3]);
        assert_eq!(hard_vote(&[vec![2], vec![4]]).unwrap(), vec![2]);
        assert_eq!(hard_vote(&[vec![2], vec![4], vec![4]]).unwrap(), vec![4]);
        // 1,2,6: all tied, mean 3 is nearest 2.
        assert_eq!(hard_vote(&[vec![1], vec![2], vec![6]]).unwrap(), vec![2]);
        assert!(hard_vote(&[vec![1], vec![]]).is_err());
    }

    #[test]
    fn threshold_application() {
        let t = ThresholdSet::INITIAL;
        assert_eq!(apply_thresholds(&[0.0, 9.0, 2.5, 2.6], &t), vec![1, 6, 2, 3]);
        assert!(ThresholdSet::new([1.0, 1.0, 2.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn exact_scores_unchanged() {
        let labels: Vec<u8> = (0..60).map(|i| (i % 6) as u8 + 1).collect();
        let scores: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
        let fit = fit_thresholds(&scores, &labels).unwrap();
        assert_eq!(fit.thresholds, ThresholdSet::INITIAL);
        assert_eq!(fit.qwk, 1.0);
    }

    #[test]
    fn shifted_scores_recovered() {
        let labels: Vec<u8> = (0..60).map(|i| (i % 6) as u8 + 1).collect();
        let scores: Vec<f64> = labels.iter().map(|&l| f64::from(l) + 10.0).collect();
        let fit = fit_thresholds(&scores, &labels).unwrap();
        assert_eq!(fit.qwk, 1.0);
        for (c, e) in fit.thresholds.cuts().iter().zip([11.5, 12.5, 13.5, 14.5, 15.5]) {
            assert!((c - e).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_errors() {
        assert!(matches!(fit_thresholds(&[2.0, 2.0, 2.0], &[1, 2, 3]), Err(Error::DegenerateQwk)));
        assert!(matches!(fit_thresholds(&[1.0, f64::NAN], &[1, 2]), Err(Error::NonFinite(_))));
        assert!(fit_thresholds(&[1.0, 2.0], &[3, 3]).is_err());
    }
}
