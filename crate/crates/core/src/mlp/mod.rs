//! Feed-forward classifier head trained with Adam under k-fold
//! cross-validation; the fold with the best validation QWK is kept.

pub mod adam;
pub mod fit;
pub mod network;

pub use adam::{Adam, AdamParams};
pub use fit::{fit, fold_assignments, select_best, train_fold, FitReport, FoldResult};
pub use network::{ForwardPass, Gradients, Layer, Network};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::prediction::{sigmoid, softmax, Prediction};
use crate::{Error, FeatureMatrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlpLoss {
    SoftmaxCrossEntropy,
    OrdinalBce,
}

impl MlpLoss {
    pub fn output_dim(self) -> usize {
        match self {
            MlpLoss::SoftmaxCrossEntropy => 6,
            MlpLoss::OrdinalBce => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Hidden layer widths; ReLU after each.
    pub hidden: Vec<usize>,
    pub loss: MlpLoss,
    pub adam: AdamParams,
    pub batch_size: usize,
    pub epochs: usize,
    pub k_folds: usize,
    pub seed: u64,
    /// z-score inputs with statistics from each fold's training rows.
    pub standardize: bool,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: alloc::vec![3200, 1600],
            loss: MlpLoss::SoftmaxCrossEntropy,
            adam: AdamParams::default(),
            batch_size: 128,
            epochs: 8,
            k_folds: 10,
            seed: 42,
            standardize: true,
        }
    }
}

impl MlpConfig {
    pub fn layer_sizes(&self, input: usize) -> Vec<usize> {
        let mut s = alloc::vec![input];
        s.extend_from_slice(&self.hidden);
        s.push(self.loss.output_dim());
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.contains(&0) {
            return Err(Error::invalid("hidden layer widths must be positive"));
        }
        if self.batch_size == 0 || self.k_folds < 2 {
            return Err(Error::invalid("batch_size must be >= 1 and k_folds >= 2"));
        }
        if !(self.adam.step_size > 0.0) || !(0.0..1.0).contains(&self.adam.beta1) || !(0.0..1.0).contains(&self.adam.beta2) {
            return Err(Error::invalid("invalid optimizer constants"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Column means and population standard deviations (1 where constant).
    pub fn fit(data: &[f64], width: usize, rows: &[usize]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut mean = alloc::vec![0.0; width];
        for &r in rows {
            for (m, &x) in mean.iter_mut().zip(&data[r * width..(r + 1) * width]) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; width];
        for &r in rows {
            for ((v, &x), &m) in var.iter_mut().zip(&data[r * width..(r + 1) * width]).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let scale = var.iter().map(|&v| {
            let s = libm::sqrt(v / n);
            if s > 0.0 { s } else { 1.0 }
        });
        Self { mean, scale: scale.collect() }
    }

    pub fn apply(&self, row: &mut [f64]) {
        for ((x, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
            *x = (*x - m) / s;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_qwk: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub config: MlpConfig,
    pub feature_names: Vec<String>,
    pub standardizer: Option<Standardizer>,
    pub network: Network,
    pub fold: usize,
    pub log: Vec<EpochLog>,
}

impl MlpModel {
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.network.layer_sizes()
    }

    /// Raw logits for a dense row-major batch, after standardisation.
    pub fn logits(&self, batch: &[f64], rows: usize) -> Result<Vec<f64>> {
        let mut input = batch.to_vec();
        if let Some(s) = &self.standardizer {
            let w = self.network.input_dim();
            for r in 0..rows {
                s.apply(&mut input[r * w..(r + 1) * w]);
            }
        }
        Ok(self.network.forward(&input, rows)?.logits().to_vec())
    }

    pub fn predict(&self, features: &FeatureMatrix) -> Result<Prediction> {
        if features.column_names() != self.feature_names.as_slice() {
            return Err(Error::Schema(format!(
                "model expects {} named columns, matrix has {} (or names differ)",
                self.feature_names.len(),
                features.n_cols()
            )));
        }
        let rows: Vec<usize> = (0..features.n_rows()).collect();
        let logits = self.logits(&features.dense_rows(&rows), rows.len())?;
        Ok(link(self.config.loss, &logits, rows.len()))
    }
}

pub(crate) fn link(loss: MlpLoss, logits: &[f64], rows: usize) -> Prediction {
    let k = loss.output_dim();
    match loss {
        MlpLoss::SoftmaxCrossEntropy => Prediction::Distribution((0..rows).map(|r| softmax(&logits[r * k..(r + 1) * k])).collect()),
        MlpLoss::OrdinalBce => Prediction::Ordinal(
            (0..rows)
                .map(|r| {
                    let mut code = [0.0; 5];
                    for c in 0..5 {
                        code[c] = sigmoid(logits[r * k + c]);
                    }
                    code
                })
                .collect(),
        ),
    }
}

pub const MLP_FORMAT: &str = "aeskit-mlp/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub file: String,
    /// `[out, in]` for weights, `[out]` for biases.
    pub shape: Vec<usize>,
}

/// JSON side of a saved model; tensors live in f32 little-endian blobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpManifest {
    pub format_version: String,
    pub config: MlpConfig,
    pub layer_sizes: Vec<usize>,
    pub feature_names: Vec<String>,
    pub standardizer: Option<Standardizer>,
    pub fold: usize,
    pub log: Vec<EpochLog>,
    pub tensors: Vec<TensorEntry>,
}

fn f32_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect()
}

fn f32_values(bytes: &[u8], expected: usize, file: &str) -> Result<Vec<f64>> {
    if bytes.len() != expected * 4 {
        return Err(Error::Schema(format!("{file}: expected {} bytes, found {}", expected * 4, bytes.len())));
    }
    bytes
        .chunks_exact(4)
        .enumerate()
        .map(|(i, c)| {
            let v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            if v.is_finite() { Ok(f64::from(v)) } else { Err(Error::NonFinite(format!("{file}: element {i}"))) }
        })
        .collect()
}

impl MlpModel {
    /// Manifest plus `(file name, bytes)` for every tensor; names are `stem`-prefixed.
    pub fn to_artifact(&self, stem: &str) -> (MlpManifest, Vec<(String, Vec<u8>)>) {
        let mut tensors = Vec::new();
        let mut blobs = Vec::new();
        for (l, layer) in self.network.layers.iter().enumerate() {
            let w = format!("{stem}.l{l}.weight.bin");
            let b = format!("{stem}.l{l}.bias.bin");
            tensors.push(TensorEntry { file: w.clone(), shape: alloc::vec![layer.out_dim, layer.in_dim] });
            tensors.push(TensorEntry { file: b.clone(), shape: alloc::vec![layer.out_dim] });
            blobs.push((w, f32_bytes(&layer.weights)));
            blobs.push((b, f32_bytes(&layer.bias)));
        }
        let manifest = MlpManifest {
            format_version: MLP_FORMAT.into(),
            config: self.config.clone(),
            layer_sizes: self.layer_sizes(),
            feature_names: self.feature_names.clone(),
            standardizer: self.standardizer.clone(),
            fold: self.fold,
            log: self.log.clone(),
            tensors,
        };
        (manifest, blobs)
    }

    pub fn from_artifact(manifest: MlpManifest, mut read: impl FnMut(&str) -> Result<Vec<u8>>) -> Result<Self> {
        if manifest.format_version != MLP_FORMAT {
            return Err(Error::Schema(format!("unsupported model format {:?}", manifest.format_version)));
        }
        let sizes = &manifest.layer_sizes;
        if sizes.len() < 2 || manifest.tensors.len() != 2 * (sizes.len() - 1) {
            return Err(Error::Schema("tensor list does not match layer sizes".into()));
        }
        if sizes[0] != manifest.feature_names.len() || *sizes.last().unwrap() != manifest.config.loss.output_dim() {
            return Err(Error::Schema("layer sizes disagree with feature names or loss".into()));
        }
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for (l, w) in sizes.windows(2).enumerate() {
            let (in_dim, out_dim) = (w[0], w[1]);
            let tw = &manifest.tensors[2 * l];
            let tb = &manifest.tensors[2 * l + 1];
            if tw.shape != [out_dim, in_dim] || tb.shape != [out_dim] {
                return Err(Error::Schema(format!("layer {l}: tensor shapes disagree with layer sizes")));
            }
            let weights = f32_values(&read(&tw.file)?, out_dim * in_dim, &tw.file)?;
            let bias = f32_values(&read(&tb.file)?, out_dim, &tb.file)?;
            layers.push(Layer { in_dim, out_dim, weights, bias });
        }
        Ok(Self {
            config: manifest.config,
            feature_names: manifest.feature_names,
            standardizer: manifest.standardizer,
            network: Network { layers },
            fold: manifest.fold,
            log: manifest.log,
        })
    }

    /// Parameters rounded through f32, matching what a saved artifact reloads to.
    pub fn quantized(&self) -> Self {
        let mut m = self.clone();
        for layer in &mut m.network.layers {
            layer.weights.iter_mut().chain(layer.bias.iter_mut()).for_each(|v| *v = f64::from(*v as f32));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::prefixed;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    fn separable(n: usize, d: usize, seed: u64) -> (FeatureMatrix, Vec<u8>) {
        let mut rng = crate::rng::StageRng::new(seed, crate::rng::stage::SYNTH);
        let centers: Vec<Vec<f64>> = (0..6).map(|_| (0..d).map(|_| 3.0 * rng.normal()).collect()).collect();
        let labels: Vec<u8> = (0..n).map(|i| (i % 6) as u8 + 1).collect();
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .map(|&y| centers[usize::from(y) - 1].iter().map(|c| c + 0.3 * rng.normal()).collect())
            .collect();
        let names = prefixed("x", (0..d).map(|j| format!("f{j}")));
        let ids = (0..n).map(|i| format!("r{i}")).collect();
        (FeatureMatrix::from_dense_rows(names, ids, &rows).unwrap(), labels)
    }

    #[test]
    fn learns_separable_classes() {
        let (m, y) = separable(500, 32, 11);
        let cfg = MlpConfig { hidden: vec![64, 32], epochs: 8, batch_size: 32, ..Default::default() };
        let report = fit(&m, &y, &cfg).unwrap();
        let pred = report.best.predict(&m).unwrap().labels();
        let acc = crate::metrics::accuracy(&y, &pred);
        assert!(acc >= 0.95, "accuracy {acc}");
        assert!(report.mean_qwk.unwrap() > 0.9);
    }

    #[test]
    fn artifact_round_trip() {
        let (m, y) = separable(60, 4, 2);
        let cfg = MlpConfig { hidden: vec![5], epochs: 1, k_folds: 3, loss: MlpLoss::OrdinalBce, ..Default::default() };
        let model = fit(&m, &y, &cfg).unwrap().best;
        let (manifest, blobs) = model.to_artifact("m");
        let store: BTreeMap<String, Vec<u8>> = blobs.into_iter().collect();
        let loaded = MlpModel::from_artifact(manifest.clone(), |f| Ok(store[f].clone())).unwrap();
        assert_eq!(loaded, model.quantized());

        let mut bad = manifest;
        bad.layer_sizes[1] = 6;
        assert!(MlpModel::from_artifact(bad, |f| Ok(store[f].clone())).is_err());
    }

    #[test]
    fn schema_mismatch() {
        let (m, y) = separable(30, 3, 2);
        let cfg = MlpConfig { hidden: vec![3], epochs: 1, k_folds: 2, ..Default::default() };
        let model = fit(&m, &y, &cfg).unwrap().best;
        let (other, _) = separable(30, 4, 2);
        assert!(matches!(model.predict(&other), Err(Error::Schema(_))));
    }

    #[test]
    fn probabilities_on_simplex() {
        let (m, y) = separable(30, 3, 5);
        let cfg = MlpConfig { hidden: vec![7], epochs: 2, k_folds: 2, ..Default::default() };
        let pred = fit(&m, &y, &cfg).unwrap().best.predict(&m).unwrap();
        for p in pred.distributions().unwrap() {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9 && p.iter().all(|&v| v >= 0.0));
        }
    }
}
