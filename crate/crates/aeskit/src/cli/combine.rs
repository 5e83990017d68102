use std::path::{Path, PathBuf};

use aeskit_core::corpus::CorpusStats;
use aeskit_core::ensemble::{self, MergeWeights, ThresholdFit, WeightGrid, WeightSearchReport};
use aeskit_core::metrics::{self, EvalReport};
use serde::{Deserialize, Serialize};

use super::args::{EnsembleCommand, EvaluateArgs, MergeArgs, OutputArg, ReportArgs, ThresholdArgs, VoteArgs};
use super::{base_config, echo, echo_path_for_file, require};
use crate::error::{CliError, CliResult, Context};
use crate::io::predictions::{read_predictions, read_truth, truth_for, write_predictions, PredValues, PredictionTable};
use crate::io::{read_ids, read_json, write_bytes, write_json};
use crate::report::{self, NamedEval};

pub fn ensemble(e: EnsembleCommand) -> CliResult<()> {
    match e {
        EnsembleCommand::Merge(a) => merge(a),
        EnsembleCommand::Vote(a) => vote(a),
        EnsembleCommand::Thresholds(a) => thresholds(a),
    }
}

/// Reads every table and reorders rows to the first table's ids.
fn load_aligned(paths: &[PathBuf]) -> CliResult<Vec<PredictionTable>> {
    let first = read_predictions(paths.first().ok_or_else(|| CliError::Usage("no --preds given".into()))?)?;
    let ids = first.ids.clone();
    let mut out = vec![first];
    for p in &paths[1..] {
        let t = read_predictions(p)?;
        if t.len() != ids.len() {
            return Err(CliError::Validation(format!("{} has {} rows, expected {}", p.display(), t.len(), ids.len())));
        }
        out.push(t.select(&ids)?);
    }
    Ok(out)
}

/// `out/name.csv` becomes `out/name.<suffix>`.
fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MergeConfig {
    pub preds: Vec<PathBuf>,
    pub weights: Option<Vec<f64>>,
    pub weights_from: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub grid: Option<Vec<f64>>,
    pub refine_step: Option<f64>,
    pub output: OutputArg,
    pub out: PathBuf,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self {
            preds: Vec::new(),
            weights: None,
            weights_from: None,
            truth: None,
            grid: None,
            refine_step: None,
            output: OutputArg::Auto,
            out: PathBuf::new(),
        }
    }
}

fn merge(a: MergeArgs) -> CliResult<()> {
    let mut cfg: MergeConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.preds {
        cfg.preds = v;
    }
    if a.weights.is_some() {
        cfg.weights = a.weights;
    }
    if a.weights_from.is_some() {
        cfg.weights_from = a.weights_from;
    }
    if a.truth.is_some() {
        cfg.truth = a.truth;
    }
    if a.grid.is_some() {
        cfg.grid = a.grid;
    }
    if a.refine_step.is_some() {
        cfg.refine_step = a.refine_step;
    }
    if let Some(v) = a.output {
        cfg.output = v;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    require(&cfg.out, "--out")?;
    if cfg.preds.len() < 2 {
        return Err(CliError::Usage("merge needs at least two --preds files".into()));
    }
    let tables = load_aligned(&cfg.preds)?;
    let dists = tables
        .iter()
        .zip(&cfg.preds)
        .map(|(t, p)| match &t.values {
            PredValues::Probs(d) => Ok(d.clone()),
            _ => Err(CliError::Validation(format!("{} holds scores, merge needs p1..p6 columns", p.display()))),
        })
        .collect::<CliResult<Vec<_>>>()?;
    let ids = tables[0].ids.clone();

    let weights = if let Some(w) = &cfg.weights {
        MergeWeights::new(w.clone()).context("--weights")?
    } else if let Some(p) = &cfg.weights_from {
        read_json::<WeightSearchReport>(p)?.best
    } else if let Some(truth_path) = &cfg.truth {
        let labels = truth_for(&read_truth(truth_path)?, &ids)?;
        let refine = cfg.refine_step.filter(|s| *s > 0.0);
        let grid = match &cfg.grid {
            Some(g) if dists.len() == 2 => WeightGrid::from_first_weights(g, refine),
            Some(_) => return Err(CliError::Usage("--grid applies to two-model merges only".into())),
            None => {
                let mut g = WeightGrid::default_for(dists.len());
                if cfg.refine_step.is_some() {
                    g.refine_step = refine;
                }
                g
            }
        };
        let report = ensemble::weight_search(&dists, &labels, &grid).context("weight search")?;
        write_json(&sidecar(&cfg.out, "weights.json"), &report)?;
        println!("chosen weights {:?}, validation QWK {:.4}", report.best.as_slice(), report.best_qwk);
        report.best
    } else {
        return Err(CliError::Usage("merge needs --weights, --weights-from or --truth".into()));
    };

    let merged = ensemble::weighted_merge(&dists, &weights).context("merge")?;
    let table = PredictionTable { ids, values: PredValues::Probs(merged) };
    let table = match cfg.output {
        OutputArg::Labels => PredictionTable { values: PredValues::Labels(table.labels()), ids: table.ids },
        _ => table,
    };
    write_predictions(&cfg.out, &table)?;
    echo(&echo_path_for_file(&cfg.out), &cfg)?;
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VoteConfig {
    pub preds: Vec<PathBuf>,
    pub out: PathBuf,
}

fn vote(a: VoteArgs) -> CliResult<()> {
    let mut cfg: VoteConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.preds {
        cfg.preds = v;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    require(&cfg.out, "--out")?;
    if cfg.preds.len() < 2 {
        return Err(CliError::Usage("vote needs at least two --preds files".into()));
    }
    let tables = load_aligned(&cfg.preds)?;
    let labels: Vec<Vec<u8>> = tables.iter().map(PredictionTable::labels).collect();
    let voted = ensemble::hard_vote(&labels).context("vote")?;
    write_predictions(&cfg.out, &PredictionTable { ids: tables[0].ids.clone(), values: PredValues::Labels(voted) })?;
    echo(&echo_path_for_file(&cfg.out), &cfg)?;
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    pub preds: PathBuf,
    pub truth: Option<PathBuf>,
    pub thresholds: Option<PathBuf>,
    pub out: PathBuf,
}

/// Continuous scores; distributions reduce to their expected score.
fn continuous(t: &PredictionTable) -> Vec<f64> {
    match &t.values {
        PredValues::Scores(s) => s.clone(),
        PredValues::Labels(l) => l.iter().map(|&v| f64::from(v)).collect(),
        PredValues::Probs(p) => p.iter().map(|d| d.iter().enumerate().map(|(k, q)| (k + 1) as f64 * q).sum()).collect(),
    }
}

fn thresholds(a: ThresholdArgs) -> CliResult<()> {
    let mut cfg: ThresholdConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.preds {
        cfg.preds = v;
    }
    if a.truth.is_some() {
        cfg.truth = a.truth;
        cfg.thresholds = None;
    }
    if a.thresholds.is_some() {
        cfg.thresholds = a.thresholds;
        cfg.truth = None;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    require(&cfg.preds, "--preds")?;
    require(&cfg.out, "--out")?;
    let table = read_predictions(&cfg.preds)?;
    let scores = continuous(&table);
    let cuts = if let Some(truth_path) = &cfg.truth {
        let labels = truth_for(&read_truth(truth_path)?, &table.ids)?;
        let fit = ensemble::fit_thresholds(&scores, &labels).context("threshold fitting")?;
        write_json(&sidecar(&cfg.out, "thresholds.json"), &fit)?;
        println!("cuts {:?}, QWK {:.4} (from {:.4}) after {} sweeps", fit.thresholds.cuts(), fit.qwk, fit.initial_qwk, fit.sweeps);
        fit.thresholds
    } else if let Some(p) = &cfg.thresholds {
        read_json::<ThresholdFit>(p)?.thresholds
    } else {
        return Err(CliError::Usage("thresholds needs --truth (fit) or --thresholds (apply)".into()));
    };
    let labels = ensemble::apply_thresholds(&scores, &cuts);
    write_predictions(&cfg.out, &PredictionTable { ids: table.ids, values: PredValues::Labels(labels) })?;
    echo(&echo_path_for_file(&cfg.out), &cfg)?;
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateConfig {
    pub preds: PathBuf,
    pub truth: PathBuf,
    pub ids: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn evaluate(a: EvaluateArgs) -> CliResult<()> {
    let mut cfg: EvaluateConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.preds {
        cfg.preds = v;
    }
    if let Some(v) = a.truth {
        cfg.truth = v;
    }
    if a.ids.is_some() {
        cfg.ids = a.ids;
    }
    if a.out.is_some() {
        cfg.out = a.out;
    }
    require(&cfg.preds, "--preds")?;
    require(&cfg.truth, "--truth")?;
    let mut table = read_predictions(&cfg.preds)?;
    if let Some(p) = &cfg.ids {
        table = table.select(&read_ids(p)?)?;
    }
    let truth = truth_for(&read_truth(&cfg.truth)?, &table.ids)?;
    let report = metrics::evaluate(&truth, &table.labels()).context("evaluate")?;
    if let Some(out) = &cfg.out {
        write_json(out, &report)?;
        echo(&echo_path_for_file(out), &cfg)?;
    }
    println!("qwk {:.6} accuracy {:.6} n {}", report.qwk, report.accuracy, report.n_evaluated);
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    pub stats: Option<PathBuf>,
    /// `name=path` or bare paths (named by file stem).
    pub evals: Vec<String>,
    pub weights: Option<PathBuf>,
    pub out: PathBuf,
}

fn named(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((name, path)) => (name.to_string(), PathBuf::from(path)),
        None => {
            let p = PathBuf::from(spec);
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or(spec).to_string();
            (name, p)
        }
    }
}

pub fn report(a: ReportArgs) -> CliResult<()> {
    let mut cfg: ReportConfig = base_config(a.config.config.as_deref())?;
    if a.stats.is_some() {
        cfg.stats = a.stats;
    }
    if let Some(v) = a.evals {
        cfg.evals = v;
    }
    if a.weights.is_some() {
        cfg.weights = a.weights;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    require(&cfg.out, "--out")?;
    let stats: Option<CorpusStats> = cfg.stats.as_deref().map(read_json).transpose()?;
    let weights: Option<WeightSearchReport> = cfg.weights.as_deref().map(read_json).transpose()?;
    let evals = cfg
        .evals
        .iter()
        .map(|s| {
            let (name, path) = named(s);
            Ok(NamedEval { name, report: read_json::<EvalReport>(&path)? })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let md = report::render(stats.as_ref(), &evals, weights.as_ref())?;
    write_bytes(&cfg.out, md.as_bytes())?;
    echo(&echo_path_for_file(&cfg.out), &cfg)?;
    Ok(())
}
