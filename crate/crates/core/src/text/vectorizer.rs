//! Term-count and TF-IDF vectorizers over casefolded word tokens.
//!
//! Vocabulary: terms with document frequency >= `min_df`, ranked by
//! (df descending, term ascending), truncated to `max_vocab`; that ranking is
//! the column order. TF-IDF uses raw counts times the smoothed
//! `idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1`, then L2-normalises each row.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::tokenize::{self, TokenizationRules};
use crate::{Error, FeatureMatrix, Result};

pub const DEFAULT_MAX_VOCAB: usize = 20_000;
pub const DEFAULT_MIN_DF: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorizerKind {
    Tfidf,
    Count,
}

impl VectorizerKind {
    pub fn prefix(self) -> &'static str {
        match self {
            VectorizerKind::Tfidf => "tfidf",
            VectorizerKind::Count => "count",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VectorizerRepr {
    kind: VectorizerKind,
    vocabulary: Vec<String>,
    document_frequencies: Vec<u64>,
    n_docs_fitted: u64,
    max_vocab: usize,
    min_df: u64,
}

/// Fitted vocabulary. Immutable after [`fit_vectorizer`]; `transform` only reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorizerRepr", into = "VectorizerRepr")]
pub struct VectorizerModel {
    repr: VectorizerRepr,
    lookup: BTreeMap<String, u32>,
    idf: Vec<f64>,
}

impl TryFrom<VectorizerRepr> for VectorizerModel {
    type Error = Error;

    fn try_from(repr: VectorizerRepr) -> Result<Self> {
        if repr.vocabulary.len() != repr.document_frequencies.len() {
            return Err(Error::invalid("vocabulary and df arrays differ in length"));
        }
        let lookup: BTreeMap<String, u32> =
            repr.vocabulary.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        if lookup.len() != repr.vocabulary.len() {
            return Err(Error::invalid("vocabulary contains duplicate terms"));
        }
        let n = repr.n_docs_fitted as f64;
        let idf = repr.document_frequencies.iter().map(|&df| libm::log((1.0 + n) / (1.0 + df as f64)) + 1.0).collect();
        Ok(Self { repr, lookup, idf })
    }
}

impl From<VectorizerModel> for VectorizerRepr {
    fn from(m: VectorizerModel) -> Self {
        m.repr
    }
}

pub fn fit_vectorizer<S: AsRef<str>>(
    texts: &[S],
    kind: VectorizerKind,
    max_vocab: usize,
    min_df: u64,
) -> Result<VectorizerModel> {
    if texts.is_empty() {
        return Err(Error::invalid("cannot fit a vectorizer on zero documents"));
    }
    let rules = TokenizationRules::default();
    let mut df: BTreeMap<String, u64> = BTreeMap::new();
    for t in texts {
        let terms: BTreeSet<String> = tokenize::words(t.as_ref()).map(|w| rules.normalize(w)).collect();
        for term in terms {
            *df.entry(term).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, u64)> = df.into_iter().filter(|(_, d)| *d >= min_df).collect();
    // BTreeMap order already gives term ascending; stable sort keeps it within equal df.
    ranked.sort_by(|a, b| b.1.cmp(&a.1));
    ranked.truncate(max_vocab);
    if ranked.is_empty() {
        return Err(Error::invalid(format!("empty vocabulary after min_df={min_df} filtering")));
    }
    let (vocabulary, document_frequencies) = ranked.into_iter().unzip();
    VectorizerModel::try_from(VectorizerRepr {
        kind,
        vocabulary,
        document_frequencies,
        n_docs_fitted: texts.len() as u64,
        max_vocab,
        min_df,
    })
}

impl VectorizerModel {
    pub fn kind(&self) -> VectorizerKind {
        self.repr.kind
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.repr.vocabulary
    }

    pub fn document_frequencies(&self) -> &[u64] {
        &self.repr.document_frequencies
    }

    pub fn n_docs_fitted(&self) -> u64 {
        self.repr.n_docs_fitted
    }

    pub fn max_vocab(&self) -> usize {
        self.repr.max_vocab
    }

    pub fn min_df(&self) -> u64 {
        self.repr.min_df
    }

    pub fn len(&self) -> usize {
        self.repr.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.repr.vocabulary.is_empty()
    }

    pub fn df(&self, term: &str) -> Option<u64> {
        self.lookup.get(term).map(|&c| self.repr.document_frequencies[c as usize])
    }

    pub fn idf(&self, column: usize) -> f64 {
        self.idf[column]
    }

    /// Sparse row as `(column, value)` pairs in ascending column order.
    pub fn transform(&self, text: &str) -> Vec<(u32, f64)> {
        let rules = TokenizationRules::default();
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        for w in tokenize::words(text) {
            if let Some(&c) = self.lookup.get(&rules.normalize(w)) {
                *counts.entry(c).or_default() += 1.0;
            }
        }
        let mut row: Vec<(u32, f64)> = counts.into_iter().collect();
        if self.repr.kind == VectorizerKind::Tfidf {
            for (c, v) in row.iter_mut() {
                *v *= self.idf[*c as usize];
            }
            let norm = libm::sqrt(row.iter().map(|(_, v)| v * v).sum::<f64>());
            if norm > 0.0 {
                for (_, v) in row.iter_mut() {
                    *v /= norm;
                }
            }
        }
        row
    }

    /// Sparse matrix for the given essays; columns named `<kind>/<term>`.
    pub fn transform_matrix<S: AsRef<str>>(&self, ids: Vec<String>, texts: &[S]) -> Result<FeatureMatrix> {
        let rows: Vec<Vec<(u32, f64)>> = texts.iter().map(|t| self.transform(t.as_ref())).collect();
        let names = crate::matrix::prefixed(self.kind().prefix(), self.vocabulary());
        FeatureMatrix::from_sparse_rows(names, ids, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn min_df_filtering() {
        let m = fit_vectorizer(&["a b", "a c"], VectorizerKind::Count, 100, 1).unwrap();
        assert_eq!(m.vocabulary(), ["a", "b", "c"]);
        assert_eq!(m.df("a"), Some(2));
        let m = fit_vectorizer(&["a b", "a c"], VectorizerKind::Count, 100, 2).unwrap();
        assert_eq!(m.vocabulary(), ["a"]);
        assert!(fit_vectorizer(&["a b", "c d"], VectorizerKind::Count, 100, 2).is_err());
    }

    #[test]
    fn ranking_and_truncation() {
        let m = fit_vectorizer(&["z y x", "z y", "z b"], VectorizerKind::Count, 2, 1).unwrap();
        assert_eq!(m.vocabulary(), ["z", "y"]);
    }

    #[test]
    fn smoothed_idf() {
        let m = fit_vectorizer(&["a b", "a", "c"], VectorizerKind::Tfidf, 100, 1).unwrap();
        let col = m.vocabulary().iter().position(|t| t == "a").unwrap();
        assert!((m.idf(col) - 1.287_682_072_451_780_9).abs() < 1e-12);
    }

    #[test]
    fn count_and_tfidf_rows() {
        let m = fit_vectorizer(&["a b", "a b"], VectorizerKind::Count, 100, 1).unwrap();
        assert_eq!(m.transform("a a b"), vec![(0, 2.0), (1, 1.0)]);
        assert!(m.transform("zzz qqq").is_empty());
        let t = fit_vectorizer(&["a b", "a c", "b d"], VectorizerKind::Tfidf, 100, 1).unwrap();
        let row = t.transform("A a b d unknown");
        let norm: f64 = row.iter().map(|(_, v)| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip_rebuilds_lookup() {
        let m = fit_vectorizer(&["a b", "a c"], VectorizerKind::Tfidf, 100, 1).unwrap();
        let repr: VectorizerRepr = m.clone().into();
        let back = VectorizerModel::try_from(repr).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.transform("c"), m.transform("c"));
    }
}
