use std::path::PathBuf;

use aeskit_core::gbdt::{self, GbdtConfig, Goss, Growth, Objective, Preset};
use aeskit_core::mlp::{self, MlpConfig, MlpLoss};
use aeskit_core::prediction::Prediction;
use aeskit_core::FeatureMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::args::{MlpLossArg, ObjectiveArg, OutputArg, PredictArgs, PresetArg, TrainCommand, TrainData, TrainGbdtArgs, TrainMlpArgs};
use super::{base_config, echo, echo_path_for_file, require};
use crate::error::{CliError, CliResult, Context};
use crate::io::features::{labels_for, load_features};
use crate::io::models::{load_model, save_model, TrainedModel};
use crate::io::predictions::{read_truth, write_predictions, PredValues, PredictionTable};
use crate::io::{read_ids, write_json};

/// Inputs shared by both learners.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub features: Vec<PathBuf>,
    pub labels: PathBuf,
    pub train_ids: Option<PathBuf>,
    pub validation_ids: Option<PathBuf>,
    pub out: PathBuf,
}

impl DataConfig {
    fn overlay(&mut self, a: TrainData) {
        if let Some(v) = a.features {
            self.features = v;
        }
        if let Some(v) = a.labels {
            self.labels = v;
        }
        if a.train_ids.is_some() {
            self.train_ids = a.train_ids;
        }
        if a.validation_ids.is_some() {
            self.validation_ids = a.validation_ids;
        }
        if let Some(v) = a.out {
            self.out = v;
        }
    }

    fn check(&self) -> CliResult<()> {
        require(&self.labels, "--labels")?;
        require(&self.out, "--out")?;
        if self.features.is_empty() {
            return Err(CliError::Usage("at least one --features source is required".into()));
        }
        Ok(())
    }

    /// Feature rows and labels for an optional id list (all scored rows otherwise).
    fn load(&self, ids: Option<&PathBuf>) -> CliResult<(FeatureMatrix, Vec<u8>)> {
        let truth = read_truth(&self.labels)?;
        let ids = match ids {
            Some(p) => read_ids(p)?,
            None => {
                let all = load_features(&self.features, None)?;
                all.row_ids().iter().filter(|id| truth.contains_key(*id)).cloned().collect()
            }
        };
        let m = load_features(&self.features, Some(&ids))?;
        let labels = labels_for(&m, &truth)?;
        Ok((m, labels))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainGbdtConfig {
    #[serde(flatten)]
    pub data: DataConfig,
    pub params: GbdtConfig,
}

impl Default for TrainGbdtConfig {
    fn default() -> Self {
        Self { data: DataConfig::default(), params: GbdtConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainMlpConfig {
    #[serde(flatten)]
    pub data: DataConfig,
    pub params: MlpConfig,
}

impl Default for TrainMlpConfig {
    fn default() -> Self {
        Self { data: DataConfig::default(), params: MlpConfig::default() }
    }
}

pub fn train(t: TrainCommand) -> CliResult<()> {
    match t {
        TrainCommand::Gbdt(a) => train_gbdt(a),
        TrainCommand::Mlp(a) => train_mlp(a),
    }
}

fn train_gbdt(a: TrainGbdtArgs) -> CliResult<()> {
    let mut cfg: TrainGbdtConfig = base_config(a.config.config.as_deref())?;
    cfg.data.overlay(a.data);
    let p = &mut cfg.params;
    if let Some(preset) = a.preset {
        *p = GbdtConfig::preset(match preset {
            PresetArg::XgbLike => Preset::XgbLike,
            PresetArg::LgbmLike => Preset::LgbmLike,
        });
    }
    if let Some(o) = a.objective {
        p.objective = match o {
            ObjectiveArg::Softmax => Objective::MulticlassSoftmax,
            ObjectiveArg::Ordinal => Objective::OrdinalBinary,
            ObjectiveArg::Regression => Objective::SquaredError,
        };
    }
    if let Some(v) = a.rounds {
        p.n_rounds = v;
    }
    if let Some(v) = a.learning_rate {
        p.learning_rate = v;
    }
    if let Some(v) = a.max_leaves {
        p.growth = Growth::LeafWise { max_leaves: v };
    }
    if let Some(v) = a.max_depth {
        p.growth = Growth::DepthWise { max_depth: v };
    }
    if let Some(v) = a.max_bins {
        p.max_bins = v;
    }
    if let Some(v) = a.min_samples_leaf {
        p.min_samples_leaf = v;
    }
    if let Some(v) = a.lambda {
        p.lambda_l2 = v;
    }
    if let Some(v) = a.min_gain {
        p.min_gain = v;
    }
    if let Some(v) = a.colsample {
        p.colsample_per_tree = v;
    }
    if let Some(v) = a.goss {
        let [top_fraction, other_fraction] = v[..] else {
            return Err(CliError::Usage(format!("--goss takes 2 values, got {}", v.len())));
        };
        p.goss = Some(Goss { top_fraction, other_fraction });
    }
    if a.no_goss {
        p.goss = None;
    }
    if let Some(v) = a.seed {
        p.seed = v;
    }
    if let Some(v) = a.patience {
        p.early_stopping_patience = Some(v);
    }
    if a.no_early_stopping {
        p.early_stopping_patience = None;
    }
    cfg.data.check()?;

    let (train_m, train_y) = cfg.data.load(cfg.data.train_ids.as_ref())?;
    let validation = match &cfg.data.validation_ids {
        Some(p) => Some(cfg.data.load(Some(p))?),
        None => None,
    };
    let forest = gbdt::train(&train_m, &train_y, &cfg.params, validation.as_ref().map(|(m, y)| (m, y.as_slice())))
        .context("gbdt training")?;
    save_model(&cfg.data.out, &TrainedModel::Gbdt(forest.clone()))?;
    echo(&cfg.data.out.join("config.json"), &cfg)?;
    let last = forest.log.last();
    println!(
        "trained {} rounds (kept {}), final train loss {}, validation QWK {}",
        forest.log.len(),
        forest.rounds.len(),
        last.map_or("n/a".into(), |l| format!("{:.6}", l.train_loss)),
        last.and_then(|l| l.validation_qwk).map_or("n/a".into(), |q| format!("{q:.4}")),
    );
    Ok(())
}

/// Per-fold summary written next to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub best_fold: usize,
    pub mean_qwk: Option<f64>,
    pub folds: Vec<mlp::FoldResult>,
}

fn train_mlp(a: TrainMlpArgs) -> CliResult<()> {
    let mut cfg: TrainMlpConfig = base_config(a.config.config.as_deref())?;
    cfg.data.overlay(a.data);
    let p = &mut cfg.params;
    if let Some(v) = a.hidden {
        p.hidden = v;
    }
    if let Some(v) = a.loss {
        p.loss = match v {
            MlpLossArg::Softmax => MlpLoss::SoftmaxCrossEntropy,
            MlpLossArg::Ordinal => MlpLoss::OrdinalBce,
        };
    }
    if let Some(v) = a.learning_rate {
        p.adam.step_size = v;
    }
    if let Some(v) = a.batch_size {
        p.batch_size = v;
    }
    if let Some(v) = a.epochs {
        p.epochs = v;
    }
    if let Some(v) = a.folds {
        p.k_folds = v;
    }
    if let Some(v) = a.seed {
        p.seed = v;
    }
    if a.no_standardize {
        p.standardize = false;
    }
    cfg.data.check()?;
    cfg.params.validate().context("mlp config")?;

    let (m, y) = cfg.data.load(cfg.data.train_ids.as_ref())?;
    if m.n_rows() < cfg.params.k_folds {
        return Err(CliError::Validation(format!("{} rows cannot fill {} folds", m.n_rows(), cfg.params.k_folds)));
    }
    let rows: Vec<usize> = (0..m.n_rows()).collect();
    let data = m.dense_rows(&rows);
    if let Some(k) = data.iter().position(|v| !v.is_finite()) {
        let source = aeskit_core::Error::NonFinite(format!("feature row {}, column {}", k / m.n_cols(), k % m.n_cols()));
        return Err(CliError::Core { context: "mlp input".into(), source });
    }
    let folds = mlp::fold_assignments(m.n_rows(), cfg.params.k_folds, cfg.params.seed);
    let results = folds
        .par_iter()
        .enumerate()
        .map(|(f, val)| mlp::train_fold(&data, m.n_cols(), &y, m.column_names(), &cfg.params, f, val))
        .collect::<aeskit_core::Result<Vec<_>>>()
        .context("mlp training")?;
    let report = mlp::select_best(results).context("mlp model selection")?;
    save_model(&cfg.data.out, &TrainedModel::Mlp(report.best.clone()))?;
    let summary = FoldReport { best_fold: report.best.fold, mean_qwk: report.mean_qwk, folds: report.folds };
    write_json(&cfg.data.out.join("folds.json"), &summary)?;
    echo(&cfg.data.out.join("config.json"), &cfg)?;
    println!(
        "best fold {} of {}, mean fold QWK {}",
        summary.best_fold,
        summary.folds.len(),
        summary.mean_qwk.map_or("n/a".into(), |q| format!("{q:.4}"))
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictConfig {
    pub model: PathBuf,
    pub features: Vec<PathBuf>,
    pub ids: Option<PathBuf>,
    pub output: OutputArg,
    pub out: PathBuf,
}

impl Default for PredictConfig {
    fn default() -> Self {
        Self { model: PathBuf::new(), features: Vec::new(), ids: None, output: OutputArg::Auto, out: PathBuf::new() }
    }
}

/// Turns a model output into a file table. Ordinal outputs become
/// distributions under `auto`/`probs`; `labels` uses the model's own decoding.
pub fn prediction_table(ids: Vec<String>, pred: &Prediction, output: OutputArg) -> CliResult<PredictionTable> {
    let values = match (output, pred) {
        (OutputArg::Labels, p) => PredValues::Labels(p.labels()),
        (_, Prediction::Continuous(s)) if output == OutputArg::Auto => PredValues::Scores(s.clone()),
        (_, p) => PredValues::Probs(
            p.distributions().ok_or_else(|| CliError::Validation("model produces scores, not probabilities".into()))?,
        ),
    };
    Ok(PredictionTable { ids, values })
}

pub fn predict(a: PredictArgs) -> CliResult<()> {
    let mut cfg: PredictConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.model {
        cfg.model = v;
    }
    if let Some(v) = a.features {
        cfg.features = v;
    }
    if a.ids.is_some() {
        cfg.ids = a.ids;
    }
    if let Some(v) = a.output {
        cfg.output = v;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    require(&cfg.model, "--model")?;
    require(&cfg.out, "--out")?;
    let model = load_model(&cfg.model)?;
    let ids = match &cfg.ids {
        Some(p) => Some(read_ids(p)?),
        None => None,
    };
    let m = load_features(&cfg.features, ids.as_deref())?;
    let pred = model.predict(&m)?;
    let table = prediction_table(m.row_ids().to_vec(), &pred, cfg.output)?;
    write_predictions(&cfg.out, &table)?;
    echo(&echo_path_for_file(&cfg.out), &cfg)?;
    println!("{} predictions -> {}", table.len(), cfg.out.display());
    Ok(())
}
