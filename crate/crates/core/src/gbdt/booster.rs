use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::binning::{build_bins, BinnedMatrix};
use super::objective::{grad_hess, loss};
use super::split::SplitParams;
use super::tree::{GrowContext, Tree};
use super::{GbdtConfig, Objective};
use crate::metrics::qwk_opt;
use crate::prediction::{sigmoid, softmax, Prediction};
use crate::rng::{stage, StageRng};
use crate::{Error, FeatureMatrix, Result, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub train_loss: f64,
    pub validation_qwk: Option<f64>,
}

/// Trained boosting model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub format_version: String,
    pub config: GbdtConfig,
    pub feature_names: Vec<String>,
    pub base_score: Vec<f64>,
    /// `rounds[r][k]`: tree for output `k` in round `r`.
    pub rounds: Vec<Vec<Tree>>,
    /// One entry per trained round, including rounds cut by early stopping.
    pub log: Vec<RoundLog>,
}

impl Forest {
    pub fn objective(&self) -> Objective {
        self.config.objective
    }

    pub fn n_outputs(&self) -> usize {
        self.config.objective.n_outputs()
    }

    /// Raw (pre-link) scores, row-major `n x K`.
    pub fn raw_scores(&self, features: &FeatureMatrix) -> Result<Vec<f64>> {
        if features.column_names() != self.feature_names.as_slice() {
            return Err(schema_error(&self.feature_names, features.column_names()));
        }
        let k = self.n_outputs();
        let mut raw = Vec::with_capacity(features.n_rows() * k);
        for _ in 0..features.n_rows() {
            raw.extend_from_slice(&self.base_score);
        }
        for round in &self.rounds {
            add_round(round, features, &mut raw, k);
        }
        Ok(raw)
    }
}

fn schema_error(expected: &[String], got: &[String]) -> Error {
    if expected.len() != got.len() {
        return Error::Schema(format!("model expects {} columns, matrix has {}", expected.len(), got.len()));
    }
    let k = expected.iter().zip(got).position(|(a, b)| a != b).unwrap_or(0);
    Error::Schema(format!("column {k}: model expects `{}`, matrix has `{}`", expected[k], got[k]))
}

fn add_round(round: &[Tree], features: &FeatureMatrix, raw: &mut [f64], k: usize) {
    for r in 0..features.n_rows() {
        for (c, tree) in round.iter().enumerate() {
            raw[r * k + c] += tree.predict(|f| features.get(r, f));
        }
    }
}

fn link(objective: Objective, raw: &[f64], n: usize) -> Prediction {
    let k = objective.n_outputs();
    match objective {
        Objective::MulticlassSoftmax => Prediction::Distribution((0..n).map(|i| softmax(&raw[i * k..(i + 1) * k])).collect()),
        Objective::OrdinalBinary => Prediction::Ordinal(
            (0..n)
                .map(|i| {
                    let mut code = [0.0; 5];
                    for c in 0..5 {
                        code[c] = sigmoid(raw[i * k + c]);
                    }
                    code
                })
                .collect(),
        ),
        Objective::SquaredError => Prediction::Continuous(raw.to_vec()),
    }
}

pub fn predict(forest: &Forest, features: &FeatureMatrix) -> Result<Prediction> {
    let raw = forest.raw_scores(features)?;
    Ok(link(forest.objective(), &raw, features.n_rows()))
}

fn check_finite(m: &FeatureMatrix, what: &str) -> Result<()> {
    for (c, col) in m.columns().iter().enumerate() {
        let bad = match col {
            crate::Column::Dense(v) => v.iter().position(|x| !x.is_finite()),
            crate::Column::Sparse { rows, values } => values.iter().position(|x| !x.is_finite()).map(|k| rows[k] as usize),
        };
        if let Some(r) = bad {
            return Err(Error::NonFinite(format!("{what} row {r}, column `{}`", m.column_names()[c])));
        }
    }
    Ok(())
}

/// Rows kept by gradient-based one-side sampling plus the amplification
/// applied to the randomly drawn small-gradient rows.
fn goss_rows(g: &[f64], k: usize, n: usize, top: f64, other: f64, rng: &mut StageRng) -> (Vec<u32>, Vec<u32>, f64) {
    let magnitude: Vec<f64> = (0..n).map(|i| g[i * k..(i + 1) * k].iter().map(|v| v.abs()).sum()).collect();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| magnitude[b as usize].total_cmp(&magnitude[a as usize]).then(a.cmp(&b)));
    let n_top = ((top * n as f64) as usize).clamp(1, n);
    let n_other = ((other * n as f64) as usize).min(n - n_top);
    let rest = &order[n_top..];
    let drawn: Vec<u32> = rng.sample_indices(rest.len(), n_other).into_iter().map(|i| rest[i]).collect();
    let mut kept: Vec<u32> = order[..n_top].to_vec();
    kept.sort_unstable();
    (kept, drawn, (1.0 - top) / other)
}

fn hard_labels(objective: Objective, raw: &[f64], n: usize) -> Vec<u8> {
    link(objective, raw, n).labels()
}

/// Fit a boosted forest. With `validation`, rounds stop after
/// `early_stopping_patience` rounds without a QWK gain and the forest is
/// cut back to the best round.
pub fn train(
    features: &FeatureMatrix,
    labels: &[u8],
    config: &GbdtConfig,
    validation: Option<(&FeatureMatrix, &[u8])>,
) -> Result<Forest> {
    config.validate()?;
    let n = features.n_rows();
    if n < 2 {
        return Err(Error::invalid("need at least 2 training rows"));
    }
    if labels.len() != n {
        return Err(Error::Shape { expected: n, got: labels.len() });
    }
    if features.n_cols() == 0 {
        return Err(Error::invalid("no candidate columns"));
    }
    check_finite(features, "training")?;
    let objective = config.objective;
    if objective == Objective::MulticlassSoftmax && labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::invalid("degenerate labels: a single class cannot train a softmax model"));
    }
    if let Some((vf, vl)) = validation {
        if vf.column_names() != features.column_names() {
            return Err(schema_error(features.column_names(), vf.column_names()));
        }
        if vf.n_rows() != vl.len() {
            return Err(Error::Shape { expected: vf.n_rows(), got: vl.len() });
        }
        check_finite(vf, "validation")?;
    }

    let k = objective.n_outputs();
    let base_score = match objective {
        Objective::SquaredError => vec![labels.iter().map(|&l| f64::from(l)).sum::<f64>() / n as f64],
        _ => vec![0.0; k],
    };
    let binning = build_bins(features, config.max_bins)?;
    let binned = BinnedMatrix::new(features, &binning)?;
    let ctx = GrowContext {
        binned: &binned,
        binning: &binning,
        params: SplitParams {
            lambda_l2: config.lambda_l2,
            min_samples_leaf: config.min_samples_leaf,
            min_gain: config.min_gain,
        },
        growth: config.growth,
        learning_rate: config.learning_rate,
    };

    let mut rng = StageRng::new(config.seed, stage::GBDT);
    let mut raw: Vec<f64> = (0..n).flat_map(|_| base_score.iter().copied()).collect();
    let mut val_raw: Option<Vec<f64>> =
        validation.map(|(vf, _)| (0..vf.n_rows()).flat_map(|_| base_score.iter().copied()).collect());

    let n_cols = features.n_cols();
    let n_sampled_cols = (libm::round(config.colsample_per_tree * n_cols as f64) as usize).clamp(1, n_cols);
    let all_rows: Vec<u32> = (0..n as u32).collect();

    let mut rounds: Vec<Vec<Tree>> = Vec::new();
    let mut log = Vec::new();
    let mut best: Option<(f64, usize)> = None;

    for round in 0..config.n_rounds {
        let (mut g, mut h) = grad_hess(objective, &raw, labels)?;
        let rows = match config.goss {
            None => all_rows.clone(),
            Some(goss) => {
                let (mut kept, drawn, amp) = goss_rows(&g, k, n, goss.top_fraction, goss.other_fraction, &mut rng);
                for &r in &drawn {
                    for c in 0..k {
                        g[r as usize * k + c] *= amp;
                        h[r as usize * k + c] *= amp;
                    }
                }
                kept.extend_from_slice(&drawn);
                kept.sort_unstable();
                kept
            }
        };
        let mut trees = Vec::with_capacity(k);
        let mut g_k = vec![0.0; n];
        let mut h_k = vec![0.0; n];
        for c in 0..k {
            let columns: Vec<usize> = if n_sampled_cols == n_cols {
                (0..n_cols).collect()
            } else {
                rng.sample_indices(n_cols, n_sampled_cols)
            };
            for i in 0..n {
                g_k[i] = g[i * k + c];
                h_k[i] = h[i * k + c];
            }
            trees.push(ctx.grow(rows.clone(), &g_k, &h_k, &columns));
        }
        add_round(&trees, features, &mut raw, k);
        let train_loss = loss(objective, &raw, labels)?;
        let mut validation_qwk = None;
        if let (Some((vf, vl)), Some(vr)) = (validation, val_raw.as_mut()) {
            add_round(&trees, vf, vr, k);
            validation_qwk = qwk_opt(vl, &hard_labels(objective, vr, vf.n_rows()));
        }
        if !train_loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss diverged at round {round}")));
        }
        rounds.push(trees);
        log.push(RoundLog { round, train_loss, validation_qwk });

        if let Some(q) = validation_qwk {
            if best.is_none_or(|(b, _)| q > b) {
                best = Some((q, round + 1));
            }
        }
        if let (Some(patience), Some((_, best_len))) = (config.early_stopping_patience, best) {
            if validation.is_some() && round + 1 - best_len >= patience {
                break;
            }
        }
    }
    if let (Some(_), Some((_, best_len))) = (validation, best) {
        rounds.truncate(best_len);
    }

    Ok(Forest {
        format_version: FORMAT_VERSION.to_string(),
        config: *config,
        feature_names: features.column_names().to_vec(),
        base_score,
        rounds,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::{Growth, Preset};
    use crate::matrix::prefixed;

    fn one_feature(xs: &[f64]) -> FeatureMatrix {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let ids = (0..xs.len()).map(|i| format!("r{i}")).collect();
        FeatureMatrix::from_dense_rows(prefixed("f", ["x"]), ids, &rows).unwrap()
    }

    fn small_config() -> GbdtConfig {
        GbdtConfig {
            n_rounds: 10,
            min_samples_leaf: 1,
            colsample_per_tree: 1.0,
            early_stopping_patience: None,
            ..GbdtConfig::preset(Preset::XgbLike)
        }
    }

    #[test]
    fn separable_two_class_fits_in_ten_rounds() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let labels: Vec<u8> = xs.iter().map(|&x| if x < 20.0 { 2 } else { 5 }).collect();
        let m = one_feature(&xs);
        let f = train(&m, &labels, &small_config(), None).unwrap();
        let pred = predict(&f, &m).unwrap().labels();
        assert_eq!(pred, labels);
        // The first tree of the true class splits exactly at the class boundary.
        match &f.rounds[0][1].nodes[0] {
            crate::gbdt::Node::Split { threshold, .. } => assert_eq!(*threshold, 19.5),
            other => panic!("expected a split, got {other:?}"),
        }
    }

    #[test]
    fn zero_learning_rate_keeps_base_score() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let labels: Vec<u8> = xs.iter().map(|&x| 1 + (x as u8 % 6)).collect();
        let m = one_feature(&xs);
        let cfg = GbdtConfig { learning_rate: 0.0, ..small_config() };
        let f = train(&m, &labels, &cfg, None).unwrap();
        for round in &f.rounds {
            for tree in round {
                for node in &tree.nodes {
                    if let crate::gbdt::Node::Leaf { weight, .. } = node {
                        assert_eq!(*weight, 0.0);
                    }
                }
            }
        }
        match predict(&f, &m).unwrap() {
            Prediction::Distribution(d) => assert!(d.iter().all(|p| p.iter().all(|&v| (v - 1.0 / 6.0).abs() < 1e-15))),
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_round_forest_is_uniform() {
        let xs = [0.0, 1.0, 2.0];
        let m = one_feature(&xs);
        let cfg = GbdtConfig { n_rounds: 0, ..small_config() };
        let f = train(&m, &[1, 2, 3], &cfg, None).unwrap();
        let d = predict(&f, &m).unwrap().distributions().unwrap();
        assert!(d.iter().all(|p| p.iter().all(|&v| (v - 1.0 / 6.0).abs() < 1e-15)));
    }

    #[test]
    fn degenerate_and_schema_errors() {
        let m = one_feature(&[0.0, 1.0, 2.0]);
        assert!(train(&m, &[3, 3, 3], &small_config(), None).is_err());
        let f = train(&m, &[1, 2, 3], &small_config(), None).unwrap();
        let other = FeatureMatrix::from_dense_rows(prefixed("g", ["x"]), vec!["a".into()], &[vec![1.0]]).unwrap();
        assert!(matches!(predict(&f, &other), Err(Error::Schema(_))));
    }

    #[test]
    fn ordinal_and_regression_objectives_learn() {
        let xs: Vec<f64> = (0..120).map(|i| i as f64).collect();
        let labels: Vec<u8> = xs.iter().map(|&x| 1 + (x / 20.0) as u8).collect();
        let m = one_feature(&xs);
        for objective in [Objective::OrdinalBinary, Objective::SquaredError] {
            let cfg = GbdtConfig {
                objective,
                n_rounds: 60,
                learning_rate: 0.3,
                growth: Growth::LeafWise { max_leaves: 8 },
                ..small_config()
            };
            let f = train(&m, &labels, &cfg, None).unwrap();
            let pred = predict(&f, &m).unwrap().labels();
            let acc = crate::metrics::accuracy(&labels, &pred);
            assert!(acc > 0.95, "{objective:?}: {acc}");
        }
    }

    #[test]
    fn early_stopping_truncates_to_best_round() {
        let xs: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let labels: Vec<u8> = xs.iter().map(|&x| if x < 30.0 { 2 } else { 4 }).collect();
        let m = one_feature(&xs);
        let cfg = GbdtConfig { n_rounds: 200, early_stopping_patience: Some(5), ..small_config() };
        let f = train(&m, &labels, &cfg, Some((&m, &labels))).unwrap();
        // QWK is perfect after the first round, so training stops at round 6.
        assert_eq!(f.log.len(), 6);
        assert_eq!(f.rounds.len(), 1);
    }
}
