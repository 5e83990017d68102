use std::collections::BTreeMap;
use std::path::Path;

use aeskit_core::prediction::{argmax_label, round_label, ScoreDistribution};
use aeskit_core::N_CLASSES;

use super::{csv_error, csv_reader, csv_writer, finish_csv, fmt_f64};
use crate::error::{CliError, CliResult};

const PROB_COLUMNS: [&str; N_CLASSES] = ["p1", "p2", "p3", "p4", "p5", "p6"];

#[derive(Debug, Clone, PartialEq)]
pub enum PredValues {
    Probs(Vec<ScoreDistribution>),
    /// Continuous scores.
    Scores(Vec<f64>),
    Labels(Vec<u8>),
}

/// One prediction per essay, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTable {
    pub ids: Vec<String>,
    pub values: PredValues,
}

impl PredictionTable {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Argmax for distributions, rounding (clamped to 1..=6) for scores.
    pub fn labels(&self) -> Vec<u8> {
        match &self.values {
            PredValues::Probs(p) => p.iter().map(argmax_label).collect(),
            PredValues::Scores(s) => s.iter().map(|&v| round_label(v)).collect(),
            PredValues::Labels(l) => l.clone(),
        }
    }

    /// Rows reordered to `ids`; every id must be present.
    pub fn select(&self, ids: &[String]) -> CliResult<PredictionTable> {
        let index: BTreeMap<&str, usize> = self.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let rows = ids
            .iter()
            .map(|id| index.get(id.as_str()).copied().ok_or_else(|| CliError::Validation(format!("no prediction for essay `{id}`"))))
            .collect::<CliResult<Vec<usize>>>()?;
        let values = match &self.values {
            PredValues::Probs(p) => PredValues::Probs(rows.iter().map(|&r| p[r]).collect()),
            PredValues::Scores(s) => PredValues::Scores(rows.iter().map(|&r| s[r]).collect()),
            PredValues::Labels(l) => PredValues::Labels(rows.iter().map(|&r| l[r]).collect()),
        };
        Ok(PredictionTable { ids: ids.to_vec(), values })
    }
}

pub fn write_predictions(path: &Path, table: &PredictionTable) -> CliResult<()> {
    let mut w = csv_writer();
    let wr = |e: csv::Error| CliError::format(path, e.to_string());
    match &table.values {
        PredValues::Probs(p) => {
            let mut header = vec!["essay_id"];
            header.extend(PROB_COLUMNS);
            w.write_record(&header).map_err(wr)?;
            for (id, d) in table.ids.iter().zip(p) {
                let mut rec = vec![id.clone()];
                rec.extend(d.iter().map(|&v| fmt_f64(v)));
                w.write_record(&rec).map_err(wr)?;
            }
        }
        PredValues::Scores(s) => {
            w.write_record(["essay_id", "score"]).map_err(wr)?;
            for (id, &v) in table.ids.iter().zip(s) {
                w.write_record([id.clone(), fmt_f64(v)]).map_err(wr)?;
            }
        }
        PredValues::Labels(l) => {
            w.write_record(["essay_id", "score"]).map_err(wr)?;
            for (id, &v) in table.ids.iter().zip(l) {
                w.write_record([id.clone(), v.to_string()]).map_err(wr)?;
            }
        }
    }
    finish_csv(path, w)
}

/// Reads `essay_id,p1..p6` or `essay_id,score`. Integer scores in 1..=6 load
/// as labels, anything else as continuous scores. Empty score cells are
/// skipped, so a corpus file with unscored rows reads as truth.
pub fn read_predictions(path: &Path) -> CliResult<PredictionTable> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let id_col = super::column(&headers, "essay_id", path)?;
    let prob_cols: Option<Vec<usize>> = PROB_COLUMNS.iter().map(|c| headers.iter().position(|h| h == *c)).collect();
    let score_col = headers.iter().position(|h| h == "score");
    if prob_cols.is_none() && score_col.is_none() {
        return Err(CliError::format(path, "expected columns p1..p6 or score"));
    }
    let mut ids = Vec::new();
    let mut probs = Vec::new();
    let mut scores = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |c: usize| -> CliResult<f64> {
            let cell = rec.get(c).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|_| CliError::format(path, format!("line {line}: `{cell}` is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::format(path, format!("line {line}: non-finite value")))
            }
        };
        if let Some(cols) = &prob_cols {
            let mut d = [0.0; N_CLASSES];
            for (k, &c) in cols.iter().enumerate() {
                d[k] = num(c)?;
            }
            if d.iter().any(|&p| p < 0.0) || (d.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
                return Err(CliError::format(path, format!("line {line}: p1..p6 is not a probability vector")));
            }
            probs.push(d);
        } else {
            let c = score_col.unwrap();
            if rec.get(c).unwrap_or("").trim().is_empty() {
                continue;
            }
            scores.push(num(c)?);
        }
        ids.push(rec[id_col].to_string());
    }
    let values = if prob_cols.is_some() {
        PredValues::Probs(probs)
    } else if scores.iter().all(|&s| s.fract() == 0.0 && (1.0..=6.0).contains(&s)) {
        PredValues::Labels(scores.iter().map(|&s| s as u8).collect())
    } else {
        PredValues::Scores(scores)
    };
    Ok(PredictionTable { ids, values })
}

/// Ground truth by id: integer `score` column or argmax of `p1..p6`.
pub fn read_truth(path: &Path) -> CliResult<BTreeMap<String, u8>> {
    let table = read_predictions(path)?;
    if let PredValues::Scores(_) = table.values {
        return Err(CliError::format(path, "truth scores must be integers in 1..=6"));
    }
    let labels = table.labels();
    Ok(table.ids.into_iter().zip(labels).collect())
}

/// Truth labels for `ids`; every id must be scored.
pub fn truth_for(truth: &BTreeMap<String, u8>, ids: &[String]) -> CliResult<Vec<u8>> {
    ids.iter()
        .map(|id| truth.get(id).copied().ok_or_else(|| CliError::Validation(format!("no true score for essay `{id}`"))))
        .collect()
}
