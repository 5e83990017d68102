use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "aeskit", about = "Automated essay scoring: features, boosting, MLP heads and QWK ensembles", disable_version_flag = true)]
pub struct Cli {
    /// Print tool and file-format versions.
    #[arg(long, short = 'V')]
    pub version: bool,

    /// Upper bound on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deterministic train/validation/test split of a corpus.
    Split(SplitArgs),
    /// Score histogram and length summary of a corpus.
    Stats(StatsArgs),
    /// Handcrafted, TF-IDF and count features.
    Featurize(FeaturizeArgs),
    /// Column-wise concatenation of embedding sets.
    EmbedConcat(EmbedConcatArgs),
    /// Synthetic corpus whose score is a step function of essay length.
    SynthCorpus(SynthCorpusArgs),
    /// Synthetic embedding set for a corpus.
    SynthEmbeddings(SynthEmbeddingsArgs),
    /// Train a learner.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Predict with a trained model.
    Predict(PredictArgs),
    /// Combine prediction files.
    #[command(subcommand)]
    Ensemble(EnsembleCommand),
    /// QWK, accuracy and confusion matrix of predictions against truth.
    Evaluate(EvaluateArgs),
    /// Markdown summary of evaluation artifacts.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArg {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SchemaArgs {
    #[arg(long)]
    pub id_column: Option<String>,
    #[arg(long)]
    pub text_column: Option<String>,
    #[arg(long)]
    pub score_column: Option<String>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Corpus CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Train,validation,test fractions.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, conflicts_with = "no_stratify")]
    pub stratify: bool,
    #[arg(long)]
    pub no_stratify: bool,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VectorizerArg {
    Tfidf,
    Count,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ids the vectorizers are fitted on (default: every essay).
    #[arg(long)]
    pub fit_ids: Option<PathBuf>,
    /// Vectorizers to fit, in column order.
    #[arg(long, value_delimiter = ',')]
    pub vectorizers: Option<Vec<VectorizerArg>>,
    #[arg(long)]
    pub max_vocab: Option<usize>,
    #[arg(long)]
    pub min_df: Option<u64>,
    /// Wordlist for spelling-error counts.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Reuse the vectorizers fitted by an earlier featurize run in this directory.
    #[arg(long)]
    pub vectorizers_from: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Args)]
pub struct EmbedConcatArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Embedding manifests, concatenated in the given order.
    #[arg(long = "input", num_args = 1..)]
    pub inputs: Option<Vec<PathBuf>>,
    /// Output stem: writes <stem>.emb.json, .emb.bin, .ids.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthCorpusArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output corpus CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthEmbeddingsArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub model_name: Option<String>,
    /// Plant no score signal.
    #[arg(long)]
    pub no_signal: bool,
    /// Output stem.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrainData {
    /// Feature sources: dense CSV, *.vectorizer.json or *.emb.json.
    #[arg(long = "features", num_args = 1..)]
    pub features: Option<Vec<PathBuf>>,
    /// CSV with essay_id and score (a corpus file works).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub train_ids: Option<PathBuf>,
    #[arg(long)]
    pub validation_ids: Option<PathBuf>,
    /// Output model directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TrainCommand {
    /// Histogram gradient-boosted trees.
    Gbdt(TrainGbdtArgs),
    /// Feed-forward network with k-fold model selection.
    Mlp(TrainMlpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    XgbLike,
    LgbmLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Softmax,
    Ordinal,
    Regression,
}

#[derive(Debug, Args)]
pub struct TrainGbdtArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub data: TrainData,
    /// Parameter preset applied before the individual flags.
    #[arg(long)]
    pub preset: Option<PresetArg>,
    #[arg(long)]
    pub objective: Option<ObjectiveArg>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long, conflicts_with = "max_depth")]
    pub max_leaves: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub max_bins: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub min_gain: Option<f64>,
    #[arg(long)]
    pub colsample: Option<f64>,
    /// GOSS top and other fractions, e.g. 0.2,0.1.
    #[arg(long, value_delimiter = ',', conflicts_with = "no_goss")]
    pub goss: Option<Vec<f64>>,
    #[arg(long)]
    pub no_goss: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, conflicts_with = "no_early_stopping")]
    pub patience: Option<usize>,
    #[arg(long)]
    pub no_early_stopping: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MlpLossArg {
    Softmax,
    Ordinal,
}

#[derive(Debug, Args)]
pub struct TrainMlpArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub data: TrainData,
    /// Hidden layer widths.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long)]
    pub loss: Option<MlpLossArg>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputArg {
    /// Probability columns when the model has them, scores otherwise.
    Auto,
    Probs,
    Labels,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Model directory written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long = "features", num_args = 1..)]
    pub features: Option<Vec<PathBuf>>,
    /// Restrict to these ids, in this order.
    #[arg(long)]
    pub ids: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<OutputArg>,
    /// Output predictions CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EnsembleCommand {
    /// Weighted probability merge, with optional QWK weight search.
    Merge(MergeArgs),
    /// Majority vote over labels.
    Vote(VoteArgs),
    /// Fit or apply cut points on continuous scores.
    Thresholds(ThresholdArgs),
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long = "preds", num_args = 1..)]
    pub preds: Option<Vec<PathBuf>>,
    /// Fixed weights, one per prediction file.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Weights chosen by an earlier search (its weights JSON).
    #[arg(long)]
    pub weights_from: Option<PathBuf>,
    /// Truth for weight search.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Candidate first-model weights for a two-model search.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Hill-climb step after the grid; 0 disables.
    #[arg(long)]
    pub refine_step: Option<f64>,
    #[arg(long)]
    pub output: Option<OutputArg>,
    /// Output predictions CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VoteArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long = "preds", num_args = 2..)]
    pub preds: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Continuous scores (or distributions, reduced to expected score).
    #[arg(long)]
    pub preds: Option<PathBuf>,
    /// Truth to fit cut points on.
    #[arg(long, conflicts_with = "thresholds")]
    pub truth: Option<PathBuf>,
    /// Previously fitted thresholds JSON to apply.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub preds: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Evaluate only these ids.
    #[arg(long)]
    pub ids: Option<PathBuf>,
    /// Output JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Corpus stats JSON.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Evaluation JSON, optionally `name=path`.
    #[arg(long = "eval", num_args = 1..)]
    pub evals: Option<Vec<String>>,
    /// Weight-search JSON.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Output markdown file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
