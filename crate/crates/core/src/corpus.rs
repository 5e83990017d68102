//! Essay records, corpus statistics and deterministic train/validation/test
//! splitting.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::rng::{stage, StageRng};
use crate::text::tokenize;
use crate::{Error, Result, N_CLASSES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EssayRecord {
    pub essay_id: String,
    pub text: String,
    pub score: Option<u8>,
}

/// Validated collection of essays: ids nonempty and unique, scores in 1..=6.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<EssayRecord>,
}

impl Corpus {
    pub fn new(records: Vec<EssayRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, r) in records.iter().enumerate() {
            if r.essay_id.is_empty() {
                return Err(Error::invalid(format!("record {i}: empty essay id")));
            }
            if !seen.insert(r.essay_id.as_str()) {
                return Err(Error::DuplicateId(r.essay_id.clone()));
            }
            if let Some(s) = r.score {
                if !(1..=N_CLASSES as u8).contains(&s) {
                    return Err(Error::ScoreOutOfRange { score: s.into(), context: r.essay_id.clone() });
                }
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[EssayRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.essay_id.as_str())
    }

    pub fn is_scored(&self) -> bool {
        self.records.iter().any(|r| r.score.is_some())
    }

    pub fn get(&self, id: &str) -> Option<&EssayRecord> {
        self.records.iter().find(|r| r.essay_id == id)
    }
}

/// Width of the buckets in [`CorpusStats::word_length_histogram`].
pub const WORD_BUCKET: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Scored essays; unscored ones are only counted in `n_unscored`.
    pub n_essays: usize,
    pub n_unscored: usize,
    pub score_histogram: [usize; N_CLASSES],
    pub word_length_min: usize,
    pub word_length_max: usize,
    pub word_length_mean: f64,
    /// `(bucket lower bound, count)` for buckets of [`WORD_BUCKET`] words.
    pub word_length_histogram: Vec<(usize, usize)>,
    /// Essays with strictly more than 500 words.
    pub n_over_500_words: usize,
}

pub fn compute_stats(corpus: &Corpus) -> Result<CorpusStats> {
    let scored: Vec<(&EssayRecord, u8)> = corpus.records.iter().filter_map(|r| r.score.map(|s| (r, s))).collect();
    if scored.is_empty() {
        return Err(Error::invalid("corpus has no scored essays"));
    }
    let mut hist = [0usize; N_CLASSES];
    let mut lengths = Vec::with_capacity(scored.len());
    for (r, s) in &scored {
        hist[usize::from(*s - 1)] += 1;
        lengths.push(tokenize::words(&r.text).count());
    }
    let max = *lengths.iter().max().unwrap_or(&0);
    let mut buckets = vec![0usize; max / WORD_BUCKET + 1];
    for &l in &lengths {
        buckets[l / WORD_BUCKET] += 1;
    }
    Ok(CorpusStats {
        n_essays: scored.len(),
        n_unscored: corpus.len() - scored.len(),
        score_histogram: hist,
        word_length_min: *lengths.iter().min().unwrap_or(&0),
        word_length_max: max,
        word_length_mean: lengths.iter().sum::<usize>() as f64 / lengths.len() as f64,
        word_length_histogram: buckets.into_iter().enumerate().map(|(b, c)| (b * WORD_BUCKET, c)).collect(),
        n_over_500_words: lengths.iter().filter(|&&l| l > 500).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Train, validation, test fractions.
    pub ratios: [f64; 3],
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { ratios: [0.8, 0.1, 0.1], seed: 42, stratified: true }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ratios.iter().any(|r| !(r.is_finite() && *r > 0.0 && *r < 1.0)) {
            return Err(Error::invalid(format!("split ratios must lie in (0,1): {:?}", self.ratios)));
        }
        let sum: f64 = self.ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("split ratios sum to {sum}, not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

/// Subset sizes for `n` items: test and validation rounded, train takes the rest.
pub fn subset_sizes(n: usize, ratios: &[f64; 3]) -> (usize, usize, usize) {
    let test = libm::round(n as f64 * ratios[2]) as usize;
    let val = libm::round(n as f64 * ratios[1]) as usize;
    (n.saturating_sub(test + val), val, test)
}

/// Largest-remainder apportionment of `total` over classes with `quotas`.
/// Each class receives floor or ceil of its quota; ties go to the lower class.
fn apportion(quotas: &[f64], total: usize) -> Vec<usize> {
    let mut out: Vec<usize> = quotas.iter().map(|&q| libm::floor(q) as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - libm::floor(quotas[a]);
        let fb = quotas[b] - libm::floor(quotas[b]);
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &c in order.iter().take(total.saturating_sub(assigned)) {
        out[c] += 1;
    }
    out
}

/// Partition the corpus into train/validation/test id lists.
///
/// Stratified mode splits scored essays only, allocating the global subset
/// sizes across score classes by largest remainder. Lists come back in corpus
/// order.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    let mut rng = StageRng::new(spec.seed, stage::SPLIT);
    // Groups of corpus positions; one group unless stratified.
    let groups: Vec<Vec<usize>> = if spec.stratified {
        if !corpus.is_scored() {
            return Err(Error::invalid("stratified split requested on an unscored corpus"));
        }
        let mut g = vec![Vec::new(); N_CLASSES];
        for (i, r) in corpus.records.iter().enumerate() {
            if let Some(s) = r.score {
                g[usize::from(s - 1)].push(i);
            }
        }
        g
    } else {
        vec![(0..corpus.len()).collect()]
    };
    let n: usize = groups.iter().map(Vec::len).sum();
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 essays to split, got {n}")));
    }
    let (n_train, n_val, n_test) = subset_sizes(n, &spec.ratios);
    for (name, size) in [("train", n_train), ("validation", n_val), ("test", n_test)] {
        if size == 0 {
            return Err(Error::EmptySubset(format!("{name} subset is empty for n={n}, ratios {:?}", spec.ratios)));
        }
    }
    let test_quota: Vec<f64> = groups.iter().map(|g| g.len() as f64 * spec.ratios[2]).collect();
    let val_quota: Vec<f64> = groups.iter().map(|g| g.len() as f64 * spec.ratios[1]).collect();
    let test_counts = apportion(&test_quota, n_test);
    let val_counts = apportion(&val_quota, n_val);

    let mut label = vec![0u8; corpus.len()]; // 0 unassigned, 1 train, 2 val, 3 test
    for (k, group) in groups.iter().enumerate() {
        let mut members = group.clone();
        rng.shuffle(&mut members);
        let n_t = test_counts[k].min(members.len());
        let n_v = val_counts[k].min(members.len() - n_t);
        for (pos, &i) in members.iter().enumerate() {
            label[i] = if pos < n_t {
                3
            } else if pos < n_t + n_v {
                2
            } else {
                1
            };
        }
    }
    let pick = |tag: u8| -> Vec<String> {
        corpus.records.iter().zip(&label).filter(|(_, &l)| l == tag).map(|(r, _)| r.essay_id.clone()).collect()
    };
    Ok(Split { train: pick(1), validation: pick(2), test: pick(3) })
}
