use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::tokenize::{self, TokenizationRules};
use crate::matrix::prefixed;
use crate::{FeatureMatrix, Result};

/// Lowercase wordlist used to count spelling errors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    words: BTreeSet<String>,
}

impl Dictionary {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        Self { words }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Column-set version; bump whenever the fields below change.
pub const HANDCRAFTED_VERSION: &str = "handcrafted/v1";

pub const HANDCRAFTED_NAMES: [&str; 16] = [
    "n_paragraphs",
    "words_per_paragraph_mean",
    "words_per_paragraph_max",
    "words_per_paragraph_min",
    "spelling_error_count",
    "n_sentences",
    "words_per_sentence_mean",
    "words_per_sentence_max",
    "chars_per_sentence_mean",
    "n_words",
    "n_unique_words",
    "word_length_mean",
    "word_length_std",
    "n_long_words",
    "type_token_ratio",
    "n_chars",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HandcraftedFeatures {
    pub n_paragraphs: f64,
    pub words_per_paragraph_mean: f64,
    pub words_per_paragraph_max: f64,
    pub words_per_paragraph_min: f64,
    pub spelling_error_count: f64,
    pub n_sentences: f64,
    pub words_per_sentence_mean: f64,
    pub words_per_sentence_max: f64,
    pub chars_per_sentence_mean: f64,
    pub n_words: f64,
    pub n_unique_words: f64,
    pub word_length_mean: f64,
    pub word_length_std: f64,
    pub n_long_words: f64,
    pub type_token_ratio: f64,
    pub n_chars: f64,
    /// False when no dictionary was supplied; `spelling_error_count` is 0 then.
    pub spelling_checked: bool,
}

impl HandcraftedFeatures {
    pub fn to_array(&self) -> [f64; 16] {
        [
            self.n_paragraphs,
            self.words_per_paragraph_mean,
            self.words_per_paragraph_max,
            self.words_per_paragraph_min,
            self.spelling_error_count,
            self.n_sentences,
            self.words_per_sentence_mean,
            self.words_per_sentence_max,
            self.chars_per_sentence_mean,
            self.n_words,
            self.n_unique_words,
            self.word_length_mean,
            self.word_length_std,
            self.n_long_words,
            self.type_token_ratio,
            self.n_chars,
        ]
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}

pub fn extract_handcrafted(text: &str, rules: &TokenizationRules, dictionary: Option<&Dictionary>) -> HandcraftedFeatures {
    let paragraphs = tokenize::paragraphs(text);
    let mut para_words = Vec::with_capacity(paragraphs.len());
    let mut sent_words = Vec::new();
    let mut sent_chars = Vec::new();
    for p in &paragraphs {
        para_words.push(tokenize::words(p).count() as f64);
        for s in tokenize::sentences(p) {
            sent_words.push(tokenize::words(s).count() as f64);
            sent_chars.push(s.chars().count() as f64);
        }
    }

    let words: Vec<&str> = tokenize::words(text).collect();
    let lengths: Vec<f64> = words.iter().map(|w| w.chars().count() as f64).collect();
    let normalized: Vec<String> = words.iter().map(|w| rules.normalize(w)).collect();
    let unique: BTreeSet<&str> = normalized.iter().map(String::as_str).collect();
    let spelling = match dictionary {
        Some(d) => words.iter().filter(|w| !d.contains(&w.to_lowercase())).count() as f64,
        None => 0.0,
    };
    let wl_mean = mean(&lengths);
    let wl_var = mean(&lengths.iter().map(|l| (l - wl_mean) * (l - wl_mean)).collect::<Vec<_>>());
    let n_words = words.len() as f64;

    HandcraftedFeatures {
        n_paragraphs: paragraphs.len() as f64,
        words_per_paragraph_mean: mean(&para_words),
        words_per_paragraph_max: max(&para_words),
        words_per_paragraph_min: para_words.iter().copied().reduce(f64::min).unwrap_or(0.0),
        spelling_error_count: spelling,
        n_sentences: sent_words.len() as f64,
        words_per_sentence_mean: mean(&sent_words),
        words_per_sentence_max: max(&sent_words),
        chars_per_sentence_mean: mean(&sent_chars),
        n_words,
        n_unique_words: unique.len() as f64,
        word_length_mean: wl_mean,
        word_length_std: libm::sqrt(wl_var),
        n_long_words: lengths.iter().filter(|&&l| l >= rules.long_word_len as f64).count() as f64,
        type_token_ratio: if words.is_empty() { 0.0 } else { unique.len() as f64 / n_words },
        n_chars: text.chars().count() as f64,
        spelling_checked: dictionary.is_some(),
    }
}

/// Handcrafted features for a list of essays, columns named `hc/<feature>`.
pub fn handcrafted_matrix<S: AsRef<str>>(
    ids: Vec<String>,
    texts: &[S],
    rules: &TokenizationRules,
    dictionary: Option<&Dictionary>,
) -> Result<FeatureMatrix> {
    let rows: Vec<Vec<f64>> =
        texts.iter().map(|t| extract_handcrafted(t.as_ref(), rules, dictionary).to_array().to_vec()).collect();
    FeatureMatrix::from_dense_rows(prefixed("hc", HANDCRAFTED_NAMES), ids, &rows)
}
