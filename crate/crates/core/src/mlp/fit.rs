use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::network::Network;
use super::{link, Adam, EpochLog, MlpConfig, MlpModel, Standardizer};
use crate::metrics::qwk_opt;
use crate::rng::{stage, StageRng};
use crate::{Error, FeatureMatrix, Result};

/// Validation row sets: a seeded permutation dealt round-robin into `k` folds.
pub fn fold_assignments(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    StageRng::new(seed, stage::MLP_FOLDS).shuffle(&mut perm);
    let mut folds = alloc::vec![Vec::new(); k];
    for (pos, &r) in perm.iter().enumerate() {
        folds[pos % k].push(r);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    folds
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_validation: usize,
    /// `None` when the validation QWK is degenerate.
    pub validation_qwk: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub best: MlpModel,
    pub folds: Vec<FoldResult>,
    pub mean_qwk: Option<f64>,
}

/// Train one fold: rows outside `validation` are the training set.
///
/// `data` is the dense row-major matrix of all rows (`width` columns).
pub fn train_fold(
    data: &[f64],
    width: usize,
    labels: &[u8],
    feature_names: &[alloc::string::String],
    config: &MlpConfig,
    fold: usize,
    validation: &[usize],
) -> Result<(MlpModel, FoldResult)> {
    let n = labels.len();
    let mut in_val = alloc::vec![false; n];
    validation.iter().for_each(|&r| in_val[r] = true);
    let mut train_rows: Vec<usize> = (0..n).filter(|&r| !in_val[r]).collect();
    if train_rows.is_empty() {
        return Err(Error::EmptySubset(format!("fold {fold} has no training rows")));
    }
    let mut rng = StageRng::with_sub(config.seed, stage::MLP_TRAIN, fold as u32);
    let mut network = Network::new(&config.layer_sizes(width), &mut rng)?;
    let standardizer = config.standardize.then(|| Standardizer::fit(data, width, &train_rows));
    let mut opt: Vec<(Adam, Adam)> = network
        .layers
        .iter()
        .map(|l| (Adam::new(config.adam, l.weights.len()), Adam::new(config.adam, l.bias.len())))
        .collect();

    let gather = |rows: &[usize]| -> Vec<f64> {
        let mut batch = Vec::with_capacity(rows.len() * width);
        for &r in rows {
            let start = batch.len();
            batch.extend_from_slice(&data[r * width..(r + 1) * width]);
            if let Some(s) = &standardizer {
                s.apply(&mut batch[start..]);
            }
        }
        batch
    };
    let val_batch = gather(validation);
    let val_labels: Vec<u8> = validation.iter().map(|&r| labels[r]).collect();

    let mut log = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        rng.shuffle(&mut train_rows);
        let mut loss_sum = 0.0;
        for (b, chunk) in train_rows.chunks(config.batch_size).enumerate() {
            let batch = gather(chunk);
            let batch_labels: Vec<u8> = chunk.iter().map(|&r| labels[r]).collect();
            let pass = network.forward(&batch, chunk.len())?;
            let (loss, grads) = network.backward(&pass, &batch_labels, config.loss)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("loss diverged: fold {fold}, epoch {epoch}, batch {b}")));
            }
            loss_sum += loss * chunk.len() as f64;
            for ((layer, (ow, ob)), (gw, gb)) in
                network.layers.iter_mut().zip(opt.iter_mut()).zip(grads.weights.iter().zip(&grads.bias))
            {
                ow.step(&mut layer.weights, gw);
                ob.step(&mut layer.bias, gb);
            }
        }
        let validation_qwk = if validation.is_empty() {
            None
        } else {
            let logits = network.forward(&val_batch, validation.len())?.logits().to_vec();
            qwk_opt(&val_labels, &link(config.loss, &logits, validation.len()).labels())
        };
        log.push(EpochLog { epoch, train_loss: loss_sum / train_rows.len() as f64, validation_qwk });
    }
    let validation_qwk = log.last().and_then(|e| e.validation_qwk);
    let model = MlpModel {
        config: config.clone(),
        feature_names: feature_names.to_vec(),
        standardizer,
        network,
        fold,
        log,
    };
    let result = FoldResult { fold, n_train: train_rows.len(), n_validation: validation.len(), validation_qwk };
    Ok((model, result))
}

/// Highest validation QWK wins, ties to the lowest fold; degenerate folds
/// rank below every scored fold.
pub fn select_best(results: Vec<(MlpModel, FoldResult)>) -> Result<FitReport> {
    let folds: Vec<FoldResult> = results.iter().map(|(_, f)| f.clone()).collect();
    let mut best_idx = 0;
    for (i, f) in folds.iter().enumerate() {
        let better = match (f.validation_qwk, folds[best_idx].validation_qwk) {
            (Some(a), Some(b)) => a > b,
            (Some(_), None) => true,
            _ => false,
        };
        if better {
            best_idx = i;
        }
    }
    let scored: Vec<f64> = folds.iter().filter_map(|f| f.validation_qwk).collect();
    let mean_qwk = (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
    let best = results.into_iter().nth(best_idx).ok_or_else(|| Error::invalid("no folds trained"))?.0;
    Ok(FitReport { best, folds, mean_qwk })
}

/// k-fold training; returns the best fold's model with the per-fold report.
pub fn fit(features: &FeatureMatrix, labels: &[u8], config: &MlpConfig) -> Result<FitReport> {
    config.validate()?;
    let n = features.n_rows();
    if labels.len() != n {
        return Err(Error::Shape { expected: n, got: labels.len() });
    }
    if n < config.k_folds {
        return Err(Error::invalid(format!("{n} rows cannot fill {} folds", config.k_folds)));
    }
    let rows: Vec<usize> = (0..n).collect();
    let data = features.dense_rows(&rows);
    if let Some(k) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("input row {}, column {}", k / features.n_cols(), k % features.n_cols())));
    }
    let results = fold_assignments(n, config.k_folds, config.seed)
        .iter()
        .enumerate()
        .map(|(f, val)| train_fold(&data, features.n_cols(), labels, features.column_names(), config, f, val))
        .collect::<Result<Vec<_>>>()?;
    select_best(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::prefixed;
    use crate::mlp::MlpLoss;
    use alloc::vec;

    #[test]
    fn folds_partition_rows() {
        let folds = fold_assignments(23, 4, 9);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(folds.iter().all(|f| f.len() == 5 || f.len() == 6));
    }

    #[test]
    fn two_rows_two_folds() {
        let m = FeatureMatrix::from_dense_rows(prefixed("f", ["a", "b"]), vec!["x".into(), "y".into()], &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let cfg = MlpConfig { hidden: vec![4], k_folds: 2, epochs: 2, ..Default::default() };
        let report = fit(&m, &[2, 5], &cfg).unwrap();
        assert_eq!(report.folds.len(), 2);
        assert!(report.folds.iter().all(|f| f.n_train == 1 && f.n_validation == 1));
    }

    #[test]
    fn too_few_rows() {
        let m = FeatureMatrix::from_dense_rows(prefixed("f", ["a"]), vec!["x".into()], &[vec![0.0]]).unwrap();
        assert!(fit(&m, &[1], &MlpConfig { k_folds: 2, ..Default::default() }).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 40.0, (i % 7) as f64]).collect();
        let labels: Vec<u8> = (0..40).map(|i| 1 + (i / 7) as u8).collect();
        let ids = (0..40).map(|i| format!("e{i}")).collect();
        let m = FeatureMatrix::from_dense_rows(prefixed("f", ["a", "b"]), ids, &rows).unwrap();
        let cfg = MlpConfig { hidden: vec![8], k_folds: 3, epochs: 3, batch_size: 8, loss: MlpLoss::OrdinalBce, ..Default::default() };
        let a = fit(&m, &labels, &cfg).unwrap();
        let b = fit(&m, &labels, &cfg).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.folds, b.folds);
    }
}
