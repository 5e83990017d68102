use std::path::PathBuf;

use aeskit_core::corpus::{self, Corpus, SplitSpec};
use aeskit_core::embed::{self, Pooling};
use aeskit_core::matrix::prefixed;
use aeskit_core::rng::PRNG_NAME;
use aeskit_core::text::handcrafted::HANDCRAFTED_NAMES;
use aeskit_core::text::vectorizer::{DEFAULT_MAX_VOCAB, DEFAULT_MIN_DF};
use aeskit_core::text::{extract_handcrafted, fit_vectorizer, Dictionary, TokenizationRules, VectorizerKind, VectorizerModel};
use aeskit_core::FeatureMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::args::{
    EmbedConcatArgs, FeaturizeArgs, SchemaArgs, SplitArgs, StatsArgs, SynthCorpusArgs, SynthEmbeddingsArgs, VectorizerArg,
};
use super::{base_config, echo, echo_path_for_file, require};
use crate::error::{CliError, CliResult, Context};
use crate::io::corpus::{load_corpus, write_corpus, ColumnSchema};
use crate::io::embeddings::{load_embeddings, save_embeddings};
use crate::io::features::{write_dense_csv, write_sparse, VECTORIZER_SUFFIX};
use crate::io::{read_ids, read_json, read_string, write_ids, write_json};

fn overlay_schema(schema: &mut ColumnSchema, a: SchemaArgs) {
    if let Some(v) = a.id_column {
        schema.id_column = v;
    }
    if let Some(v) = a.text_column {
        schema.text_column = v;
    }
    if let Some(v) = a.score_column {
        schema.score_column = v;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    pub schema: ColumnSchema,
    pub ratios: [f64; 3],
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let spec = SplitSpec::default();
        Self {
            input: PathBuf::new(),
            out: PathBuf::new(),
            schema: ColumnSchema::default(),
            ratios: spec.ratios,
            seed: spec.seed,
            stratified: spec.stratified,
        }
    }
}

/// Sidecar describing how a split was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub tool_version: String,
    pub format_version: String,
    pub prng: String,
    pub ratios: [f64; 3],
    pub seed: u64,
    pub stratified: bool,
    pub sizes: [usize; 3],
    pub files: [String; 3],
}

pub fn split(a: SplitArgs) -> CliResult<()> {
    let mut cfg: SplitConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.input {
        cfg.input = v;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    if let Some(v) = a.ratios {
        cfg.ratios = v
            .try_into()
            .map_err(|v: Vec<f64>| CliError::Usage(format!("--ratios takes 3 values, got {}", v.len())))?;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if a.stratify {
        cfg.stratified = true;
    }
    if a.no_stratify {
        cfg.stratified = false;
    }
    overlay_schema(&mut cfg.schema, a.schema);
    require(&cfg.input, "--input")?;
    require(&cfg.out, "--out")?;

    let corpus = load_corpus(&cfg.input, &cfg.schema)?;
    let spec = SplitSpec { ratios: cfg.ratios, seed: cfg.seed, stratified: cfg.stratified };
    let s = corpus::split(&corpus, &spec).context("split")?;
    let files = ["train.txt".to_string(), "validation.txt".to_string(), "test.txt".to_string()];
    for (name, ids) in files.iter().zip([&s.train, &s.validation, &s.test]) {
        write_ids(&cfg.out.join(name), ids)?;
    }
    let manifest = SplitManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        format_version: aeskit_core::FORMAT_VERSION.into(),
        prng: PRNG_NAME.into(),
        ratios: cfg.ratios,
        seed: cfg.seed,
        stratified: cfg.stratified,
        sizes: [s.train.len(), s.validation.len(), s.test.len()],
        files,
    };
    write_json(&cfg.out.join("split.json"), &manifest)?;
    echo(&cfg.out.join("config.json"), &cfg)?;
    println!("train {} / validation {} / test {}", manifest.sizes[0], manifest.sizes[1], manifest.sizes[2]);
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    pub schema: ColumnSchema,
}

pub fn stats(a: StatsArgs) -> CliResult<()> {
    let mut cfg: StatsConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.input {
        cfg.input = v;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    overlay_schema(&mut cfg.schema, a.schema);
    require(&cfg.input, "--input")?;
    require(&cfg.out, "--out")?;
    let corpus = load_corpus(&cfg.input, &cfg.schema)?;
    let s = corpus::compute_stats(&corpus).context("stats")?;
    write_json(&cfg.out, &s)?;
    echo(&echo_path_for_file(&cfg.out), &cfg)?;
    println!("{} scored essays, histogram {:?}, {} over 500 words", s.n_essays, s.score_histogram, s.n_over_500_words);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeaturizeConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    pub schema: ColumnSchema,
    pub fit_ids: Option<PathBuf>,
    pub vectorizers: Vec<VectorizerKind>,
    pub max_vocab: usize,
    pub min_df: u64,
    pub dictionary: Option<PathBuf>,
    pub vectorizers_from: Option<PathBuf>,
}

impl Default for FeaturizeConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            out: PathBuf::new(),
            schema: ColumnSchema::default(),
            fit_ids: None,
            vectorizers: vec![VectorizerKind::Tfidf, VectorizerKind::Count],
            max_vocab: DEFAULT_MAX_VOCAB,
            min_df: DEFAULT_MIN_DF,
            dictionary: None,
            vectorizers_from: None,
        }
    }
}

pub const HANDCRAFTED_FILE: &str = "handcrafted.csv";

/// Handcrafted rows extracted in parallel; row order follows `texts`.
pub fn handcrafted_parallel(ids: Vec<String>, texts: &[&str], dictionary: Option<&Dictionary>) -> CliResult<FeatureMatrix> {
    let rules = TokenizationRules::default();
    let rows: Vec<Vec<f64>> =
        texts.par_iter().map(|t| extract_handcrafted(t, &rules, dictionary).to_array().to_vec()).collect();
    FeatureMatrix::from_dense_rows(prefixed("hc", HANDCRAFTED_NAMES), ids, &rows).context("handcrafted features")
}

pub fn transform_parallel(model: &VectorizerModel, ids: Vec<String>, texts: &[&str]) -> CliResult<FeatureMatrix> {
    let rows: Vec<Vec<(u32, f64)>> = texts.par_iter().map(|t| model.transform(t)).collect();
    let names = prefixed(model.kind().prefix(), model.vocabulary());
    FeatureMatrix::from_sparse_rows(names, ids, &rows).context("vectorizer transform")
}

pub fn featurize(a: FeaturizeArgs) -> CliResult<()> {
    let mut cfg: FeaturizeConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.input {
        cfg.input = v;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    if a.fit_ids.is_some() {
        cfg.fit_ids = a.fit_ids;
    }
    if let Some(v) = a.vectorizers {
        cfg.vectorizers = v
            .into_iter()
            .map(|k| match k {
                VectorizerArg::Tfidf => VectorizerKind::Tfidf,
                VectorizerArg::Count => VectorizerKind::Count,
            })
            .collect();
    }
    if let Some(v) = a.max_vocab {
        cfg.max_vocab = v;
    }
    if let Some(v) = a.min_df {
        cfg.min_df = v;
    }
    if a.dictionary.is_some() {
        cfg.dictionary = a.dictionary;
    }
    if a.vectorizers_from.is_some() {
        cfg.vectorizers_from = a.vectorizers_from;
    }
    overlay_schema(&mut cfg.schema, a.schema);
    require(&cfg.input, "--input")?;
    require(&cfg.out, "--out")?;

    let corpus = load_corpus(&cfg.input, &cfg.schema)?;
    let ids: Vec<String> = corpus.ids().map(String::from).collect();
    let texts: Vec<&str> = corpus.records().iter().map(|r| r.text.as_str()).collect();
    let dictionary = match &cfg.dictionary {
        Some(p) => Some(Dictionary::from_words(read_string(p)?.lines())),
        None => None,
    };
    let hc = handcrafted_parallel(ids.clone(), &texts, dictionary.as_ref())?;
    write_dense_csv(&cfg.out.join(HANDCRAFTED_FILE), &hc)?;

    let fit_texts: Vec<&str> = match &cfg.fit_ids {
        Some(p) => read_ids(p)?
            .iter()
            .map(|id| {
                corpus
                    .get(id)
                    .map(|r| r.text.as_str())
                    .ok_or_else(|| CliError::Validation(format!("fit id `{id}` is not in the corpus")))
            })
            .collect::<CliResult<_>>()?,
        None => texts.clone(),
    };
    for &kind in &cfg.vectorizers {
        let model: VectorizerModel = match &cfg.vectorizers_from {
            Some(dir) => read_json(&dir.join(format!("{}{VECTORIZER_SUFFIX}", kind.prefix())))?,
            None => fit_vectorizer(&fit_texts, kind, cfg.max_vocab, cfg.min_df).context(format!("fitting {}", kind.prefix()))?,
        };
        if model.kind() != kind {
            return Err(CliError::Validation(format!("reused vectorizer is not of kind {}", kind.prefix())));
        }
        let m = transform_parallel(&model, ids.clone(), &texts)?;
        write_sparse(&cfg.out.join(kind.prefix()), &model, &m)?;
        println!("{}: {} terms", kind.prefix(), model.len());
    }
    echo(&cfg.out.join("config.json"), &cfg)?;
    println!("{} essays featurized", ids.len());
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedConcatConfig {
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
}

pub fn embed_concat(a: EmbedConcatArgs) -> CliResult<()> {
    let mut cfg: EmbedConcatConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.inputs {
        cfg.inputs = v;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    require(&cfg.out, "--out")?;
    if cfg.inputs.is_empty() {
        return Err(CliError::Usage("at least one --input manifest is required".into()));
    }
    let sets = cfg.inputs.iter().map(|p| load_embeddings(p)).collect::<CliResult<Vec<_>>>()?;
    let joined = embed::concat(&sets).context("embed-concat")?;
    let manifest = save_embeddings(&cfg.out, &joined)?;
    echo(&manifest.with_file_name(format!("{}.config.json", file_name(&cfg.out)?)), &cfg)?;
    println!("{} rows x {} dims -> {}", joined.count(), joined.dim(), manifest.display());
    Ok(())
}

fn file_name(p: &std::path::Path) -> CliResult<&str> {
    p.file_name().and_then(|n| n.to_str()).ok_or_else(|| CliError::Usage(format!("invalid output path {}", p.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthCorpusConfig {
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for SynthCorpusConfig {
    fn default() -> Self {
        Self { n: 200, seed: 42, out: PathBuf::new() }
    }
}

pub fn synth_corpus(a: SynthCorpusArgs) -> CliResult<()> {
    let mut cfg: SynthCorpusConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    require(&cfg.out, "--out")?;
    let corpus: Corpus = crate::synth::synth_corpus(cfg.n, cfg.seed).context("synth-corpus")?;
    write_corpus(&cfg.out, &corpus, &ColumnSchema::default())?;
    echo(&echo_path_for_file(&cfg.out), &cfg)?;
    println!("{} synthetic essays", corpus.len());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthEmbeddingsConfig {
    pub input: PathBuf,
    pub schema: ColumnSchema,
    pub dim: usize,
    pub seed: u64,
    pub model_name: String,
    pub signal: bool,
    pub out: PathBuf,
}

impl Default for SynthEmbeddingsConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            schema: ColumnSchema::default(),
            dim: 32,
            seed: 42,
            model_name: "synthetic".into(),
            signal: true,
            out: PathBuf::new(),
        }
    }
}

pub fn synth_embeddings(a: SynthEmbeddingsArgs) -> CliResult<()> {
    let mut cfg: SynthEmbeddingsConfig = base_config(a.config.config.as_deref())?;
    if let Some(v) = a.input {
        cfg.input = v;
    }
    if let Some(v) = a.dim {
        cfg.dim = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.model_name {
        cfg.model_name = v;
    }
    if a.no_signal {
        cfg.signal = false;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    overlay_schema(&mut cfg.schema, a.schema);
    require(&cfg.input, "--input")?;
    require(&cfg.out, "--out")?;
    let corpus = load_corpus(&cfg.input, &cfg.schema)?;
    let ids: Vec<String> = corpus.ids().map(String::from).collect();
    let scores: Option<Vec<u8>> = if cfg.signal {
        Some(
            corpus
                .records()
                .iter()
                .map(|r| r.score.ok_or_else(|| CliError::Validation(format!("essay `{}` has no score to plant", r.essay_id))))
                .collect::<CliResult<_>>()?,
        )
    } else {
        None
    };
    let mut set = embed::synth_embeddings(cfg.seed, ids, cfg.dim, scores.as_deref()).context("synth-embeddings")?;
    set.manifest.model_name = cfg.model_name.clone();
    set.manifest.pooling = Pooling::Mean;
    let manifest = save_embeddings(&cfg.out, &set)?;
    echo(&manifest.with_file_name(format!("{}.config.json", file_name(&cfg.out)?)), &cfg)?;
    println!("{} rows x {} dims -> {}", set.count(), set.dim(), manifest.display());
    Ok(())
}
