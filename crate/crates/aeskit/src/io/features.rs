use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aeskit_core::text::VectorizerModel;
use aeskit_core::FeatureMatrix;

use super::embeddings::{load_embeddings, MANIFEST_SUFFIX};
use super::{csv_error, csv_reader, csv_writer, finish_csv, fmt_f64, read_ids, read_json, write_ids, write_json};
use crate::error::{CliError, CliResult, Context};

pub const VECTORIZER_SUFFIX: &str = ".vectorizer.json";

/// Dense table: `essay_id` then one column per feature.
pub fn write_dense_csv(path: &Path, m: &FeatureMatrix) -> CliResult<()> {
    let mut w = csv_writer();
    let wr = |e: csv::Error| CliError::format(path, e.to_string());
    let mut header = vec!["essay_id".to_string()];
    header.extend(m.column_names().iter().cloned());
    w.write_record(&header).map_err(wr)?;
    for (r, id) in m.row_ids().iter().enumerate() {
        let mut rec = vec![id.clone()];
        rec.extend((0..m.n_cols()).map(|c| fmt_f64(m.get(r, c))));
        w.write_record(&rec).map_err(wr)?;
    }
    finish_csv(path, w)
}

pub fn read_dense_csv(path: &Path) -> CliResult<FeatureMatrix> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.get(0) != Some("essay_id") {
        return Err(CliError::format(path, "first column must be `essay_id`"));
    }
    let names: Vec<String> = headers.iter().skip(1).map(String::from).collect();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        ids.push(rec[0].to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::format(path, format!("line {line}: `{v}` is not a number"))))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    FeatureMatrix::from_dense_rows(names, ids, &rows).context(path.display().to_string())
}

fn sparse_paths(vectorizer_path: &Path) -> CliResult<(PathBuf, PathBuf)> {
    let name = vectorizer_path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let stem = name
        .strip_suffix(VECTORIZER_SUFFIX)
        .ok_or_else(|| CliError::Usage(format!("{} does not end in {VECTORIZER_SUFFIX}", vectorizer_path.display())))?;
    Ok((vectorizer_path.with_file_name(format!("{stem}.triplets.csv")), vectorizer_path.with_file_name(format!("{stem}.rows.txt"))))
}

/// Writes `<stem>.vectorizer.json`, `<stem>.triplets.csv` (row,col,value over
/// nonzeros) and `<stem>.rows.txt`.
pub fn write_sparse(stem: &Path, model: &VectorizerModel, m: &FeatureMatrix) -> CliResult<PathBuf> {
    let name = stem.file_name().and_then(|n| n.to_str()).unwrap_or("features");
    let vec_path = stem.with_file_name(format!("{name}{VECTORIZER_SUFFIX}"));
    let (triplets, rows) = sparse_paths(&vec_path)?;
    write_json(&vec_path, model)?;
    write_ids(&rows, m.row_ids())?;

    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (c, col) in m.columns().iter().enumerate() {
        match col {
            aeskit_core::Column::Sparse { rows, values } => {
                entries.extend(rows.iter().zip(values).map(|(&r, &v)| (r as usize, c, v)));
            }
            aeskit_core::Column::Dense(v) => {
                entries.extend(v.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(r, &x)| (r, c, x)));
            }
        }
    }
    entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut w = csv_writer();
    let wr = |e: csv::Error| CliError::format(&triplets, e.to_string());
    w.write_record(["row", "col", "value"]).map_err(wr)?;
    for (r, c, v) in entries {
        w.write_record([r.to_string(), c.to_string(), fmt_f64(v)]).map_err(wr)?;
    }
    finish_csv(&triplets, w)?;
    Ok(vec_path)
}

pub fn read_sparse(vectorizer_path: &Path) -> CliResult<FeatureMatrix> {
    let model: VectorizerModel = read_json(vectorizer_path)?;
    let (triplets, rows_path) = sparse_paths(vectorizer_path)?;
    let ids = read_ids(&rows_path)?;
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); ids.len()];
    let mut reader = csv_reader(&triplets)?;
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(&triplets, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = || CliError::format(&triplets, format!("line {line}: malformed triplet"));
        if rec.len() != 3 {
            return Err(bad());
        }
        let r: usize = rec[0].parse().map_err(|_| bad())?;
        let c: u32 = rec[1].parse().map_err(|_| bad())?;
        let v: f64 = rec[2].parse().map_err(|_| bad())?;
        if r >= ids.len() || c as usize >= model.len() {
            return Err(CliError::format(&triplets, format!("line {line}: index out of range")));
        }
        rows[r].push((c, v));
    }
    rows.iter_mut().for_each(|r| r.sort_by_key(|e| e.0));
    let names = aeskit_core::matrix::prefixed(model.kind().prefix(), model.vocabulary());
    FeatureMatrix::from_sparse_rows(names, ids, &rows).context(triplets.display().to_string())
}

/// Loads one feature source, chosen by file name: `*.emb.json` embeddings,
/// `*.vectorizer.json` sparse triplets, anything else a dense CSV.
pub fn load_source(path: &Path) -> CliResult<FeatureMatrix> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    if name.ends_with(MANIFEST_SUFFIX) {
        load_embeddings(path)?.to_feature_matrix().context(path.display().to_string())
    } else if name.ends_with(VECTORIZER_SUFFIX) {
        read_sparse(path)
    } else {
        read_dense_csv(path)
    }
}

/// Sources stacked column-wise in the given order, rows aligned to the first
/// source's ids, then restricted to `ids` when given.
pub fn load_features(paths: &[PathBuf], ids: Option<&[String]>) -> CliResult<FeatureMatrix> {
    let first = paths.first().ok_or_else(|| CliError::Usage("at least one --features source is required".into()))?;
    let mut parts = vec![load_source(first)?];
    let order = parts[0].row_ids().to_vec();
    for p in &paths[1..] {
        let m = load_source(p)?;
        parts.push(m.select_ids(&order).context(p.display().to_string())?);
    }
    let stacked = if parts.len() == 1 { parts.pop().unwrap() } else { FeatureMatrix::hstack(&parts).context("stacking feature sources")? };
    match ids {
        Some(ids) => stacked.select_ids(ids).context("selecting rows"),
        None => Ok(stacked),
    }
}

/// Labels for the matrix rows, looked up by id.
pub fn labels_for(m: &FeatureMatrix, truth: &BTreeMap<String, u8>) -> CliResult<Vec<u8>> {
    m.row_ids()
        .iter()
        .map(|id| truth.get(id).copied().ok_or_else(|| CliError::Validation(format!("no score for essay `{id}`"))))
        .collect()
}
