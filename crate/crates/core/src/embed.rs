//! Encoder embedding sets and their on-disk byte layout.
//!
//! A set is three files: a JSON manifest, a row-major little-endian `f32`
//! payload of `count * dim` values, and a newline-delimited id list. This
//! module owns the byte-level parsing and validation; `aeskit` does the IO.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::rng::{stage, StageRng};
use crate::{Column, Error, FeatureMatrix, Result};

pub const EMBEDDING_FORMAT: &str = "aes-emb/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    Cls,
    Mean,
    /// Concatenation of sets with different pooling.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingManifest {
    pub format_version: String,
    pub model_name: String,
    pub dim: usize,
    pub pooling: Pooling,
    pub count: usize,
    pub dtype: String,
    pub layout: String,
    /// Payload path, relative to the manifest's directory.
    pub data_file: String,
    pub ids_file: String,
}

impl EmbeddingManifest {
    /// Manifest for `<stem>.emb.bin` / `<stem>.ids.txt`.
    pub fn new(model_name: &str, dim: usize, count: usize, pooling: Pooling, stem: &str) -> Self {
        Self {
            format_version: EMBEDDING_FORMAT.to_string(),
            model_name: model_name.to_string(),
            dim,
            pooling,
            count,
            dtype: "f32le".to_string(),
            layout: "row-major".to_string(),
            data_file: format!("{stem}.emb.bin"),
            ids_file: format!("{stem}.ids.txt"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != EMBEDDING_FORMAT {
            return Err(Error::invalid(format!("unknown embedding format_version `{}`", self.format_version)));
        }
        if self.dtype != "f32le" || self.layout != "row-major" {
            return Err(Error::invalid(format!("unsupported dtype/layout {}/{}", self.dtype, self.layout)));
        }
        if self.dim == 0 {
            return Err(Error::invalid("embedding dim must be positive"));
        }
        Ok(())
    }

    pub fn expected_bytes(&self) -> usize {
        self.dim * self.count * 4
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub manifest: EmbeddingManifest,
    /// Row-major `count x dim`.
    values: Vec<f32>,
    row_ids: Vec<String>,
}

impl EmbeddingSet {
    pub fn new(manifest: EmbeddingManifest, values: Vec<f32>, row_ids: Vec<String>) -> Result<Self> {
        manifest.validate()?;
        if values.len() != manifest.dim * manifest.count {
            return Err(Error::Shape { expected: manifest.dim * manifest.count, got: values.len() });
        }
        if row_ids.len() != manifest.count {
            return Err(Error::invalid(format!("ids list has {} entries, manifest count is {}", row_ids.len(), manifest.count)));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (k / manifest.dim, k % manifest.dim);
            let what = if values[k].is_nan() { "NaN" } else { "Inf" };
            return Err(Error::NonFinite(format!("{what} at row {r}, col {c}")));
        }
        let mut seen = BTreeSet::new();
        for id in &row_ids {
            if id.is_empty() || !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        Ok(Self { manifest, values, row_ids })
    }

    /// Parse the payload bytes and the ids file content against a manifest.
    pub fn from_bytes(manifest: EmbeddingManifest, data: &[u8], ids_text: &str) -> Result<Self> {
        manifest.validate()?;
        if data.len() != manifest.expected_bytes() {
            return Err(Error::invalid(format!(
                "size mismatch: payload has {} bytes, manifest implies {} ({} x {} x 4)",
                data.len(),
                manifest.expected_bytes(),
                manifest.count,
                manifest.dim
            )));
        }
        let values = data.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
        let row_ids = ids_text.lines().map(|l| l.trim_end_matches('\r').to_string()).collect();
        Self::new(manifest, values, row_ids)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn ids_text(&self) -> String {
        let mut s = String::new();
        for id in &self.row_ids {
            s.push_str(id);
            s.push('\n');
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.manifest.dim
    }

    pub fn count(&self) -> usize {
        self.manifest.count
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.values[r * self.dim()..(r + 1) * self.dim()]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Columns named `<model_name>/e<k>`, one row per essay.
    pub fn to_feature_matrix(&self) -> Result<FeatureMatrix> {
        let dim = self.dim();
        let names = (0..dim).map(|k| format!("{}/e{k}", self.manifest.model_name)).collect();
        let columns = (0..dim)
            .map(|k| Column::Dense(self.values.iter().skip(k).step_by(dim).map(|&v| f64::from(v)).collect()))
            .collect();
        FeatureMatrix::new(names, self.row_ids.clone(), columns)
    }
}

/// Join sets column-wise; all sets must list identical ids in identical order.
pub fn concat(sets: &[EmbeddingSet]) -> Result<EmbeddingSet> {
    let first = sets.first().ok_or_else(|| Error::invalid("nothing to concatenate"))?;
    for (k, s) in sets.iter().enumerate().skip(1) {
        if s.row_ids != first.row_ids {
            let a: BTreeSet<&String> = first.row_ids.iter().collect();
            let b: BTreeSet<&String> = s.row_ids.iter().collect();
            return Err(Error::RowMismatch(if a == b {
                format!("set {k} (`{}`) lists the same ids in a different order", s.manifest.model_name)
            } else {
                format!("set {k} (`{}`) has a different id set", s.manifest.model_name)
            }));
        }
    }
    let dim: usize = sets.iter().map(EmbeddingSet::dim).sum();
    let count = first.count();
    let mut values = Vec::with_capacity(dim * count);
    for r in 0..count {
        for s in sets {
            values.extend_from_slice(s.row(r));
        }
    }
    let name = sets.iter().map(|s| s.manifest.model_name.as_str()).collect::<Vec<_>>().join("+");
    let pooling = if sets.iter().all(|s| s.manifest.pooling == first.manifest.pooling) {
        first.manifest.pooling
    } else {
        Pooling::Mixed
    };
    let stem = if sets.len() == 1 { stem_of(&first.manifest.data_file) } else { String::from("concat") };
    let manifest = EmbeddingManifest::new(&name, dim, count, pooling, &stem);
    EmbeddingSet::new(manifest, values, first.row_ids.clone())
}

fn stem_of(data_file: &str) -> String {
    data_file.strip_suffix(".emb.bin").unwrap_or(data_file).to_string()
}

/// Noise scale and class spacing along the signal direction.
const SYNTH_SIGNAL_SPACING: f64 = 6.0;

/// Seeded Gaussian fixture matrix. With `scores`, each row is shifted along
/// a fixed unit direction by `6 * (score - 3.5)` so that a linear model can
/// read the score back.
pub fn synth_embeddings(seed: u64, row_ids: Vec<String>, dim: usize, scores: Option<&[u8]>) -> Result<EmbeddingSet> {
    if dim == 0 || row_ids.is_empty() {
        return Err(Error::invalid("synthetic embeddings need count > 0 and dim > 0"));
    }
    if let Some(s) = scores {
        if s.len() != row_ids.len() {
            return Err(Error::Shape { expected: row_ids.len(), got: s.len() });
        }
    }
    let mut rng = StageRng::new(seed, stage::SYNTH);
    let mut direction: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
    let norm = libm::sqrt(direction.iter().map(|d| d * d).sum::<f64>());
    direction.iter_mut().for_each(|d| *d /= norm);
    let count = row_ids.len();
    let mut values = Vec::with_capacity(count * dim);
    for r in 0..count {
        let shift = scores.map_or(0.0, |s| SYNTH_SIGNAL_SPACING * (f64::from(s[r]) - 3.5));
        for d in &direction {
            values.push((rng.normal() + shift * d) as f32);
        }
    }
    let name = format!("synth-{seed}");
    let manifest = EmbeddingManifest::new(&name, dim, count, Pooling::Cls, &name);
    EmbeddingSet::new(manifest, values, row_ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("e{i}")).collect()
    }

    #[test]
    fn loads_consistent_payload() {
        let m = EmbeddingManifest::new("m", 1024, 10, Pooling::Cls, "m");
        let data = vec![0u8; 40_960];
        let ids_text: String = ids(10).iter().map(|i| format!("{i}\n")).collect();
        let set = EmbeddingSet::from_bytes(m.clone(), &data, &ids_text).unwrap();
        assert_eq!(set.count(), 10);
        let err = EmbeddingSet::from_bytes(m, &data[..40_956], &ids_text).unwrap_err();
        assert!(alloc::format!("{err}").contains("size mismatch"));
    }

    #[test]
    fn nan_is_located() {
        let m = EmbeddingManifest::new("m", 2, 2, Pooling::Mean, "m");
        let mut data = vec![0u8; 16];
        data[12..16].copy_from_slice(&0x7FC0_0000u32.to_le_bytes());
        let err = EmbeddingSet::from_bytes(m, &data, "a\nb\n").unwrap_err();
        assert_eq!(err, Error::NonFinite("NaN at row 1, col 1".into()));
    }

    #[test]
    fn rejects_unknown_version_and_dupes() {
        let mut m = EmbeddingManifest::new("m", 1, 2, Pooling::Cls, "m");
        assert!(EmbeddingSet::from_bytes(m.clone(), &[0; 8], "a\na\n").is_err());
        m.format_version = "aes-emb/9".into();
        assert!(EmbeddingSet::from_bytes(m, &[0; 8], "a\nb\n").is_err());
    }

    #[test]
    fn feature_matrix_naming_and_values() {
        let m = EmbeddingManifest::new("m", 4, 3, Pooling::Cls, "m");
        let vals: Vec<f32> = (0..12).map(|v| v as f32 * 0.1).collect();
        let set = EmbeddingSet::new(m, vals.clone(), ids(3)).unwrap();
        let fm = set.to_feature_matrix().unwrap();
        assert_eq!((fm.n_rows(), fm.n_cols()), (3, 4));
        assert_eq!(fm.column_names()[0], "m/e0");
        for r in 0..3 {
            for c in 0..4 {
                assert_eq!(fm.get(r, c), f64::from(vals[r * 4 + c]));
            }
        }
    }

    #[test]
    fn concat_checks_ids() {
        let a = synth_embeddings(1, ids(3), 2, None).unwrap();
        assert_eq!(concat(core::slice::from_ref(&a)).unwrap().values(), a.values());
        let mut rev = ids(3);
        rev.reverse();
        let b = synth_embeddings(2, rev, 2, None).unwrap();
        let err = concat(&[a, b]).unwrap_err();
        assert!(matches!(err, Error::RowMismatch(m) if m.contains("different order")));
    }

    #[test]
    fn synth_is_deterministic_and_rejects_zero_dim() {
        let a = synth_embeddings(1, ids(5), 8, None).unwrap();
        let b = synth_embeddings(1, ids(5), 8, None).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        assert!(synth_embeddings(1, ids(5), 0, None).is_err());
    }
}
