use std::collections::HashSet;
use std::path::Path;

use aeskit_core::corpus::{Corpus, EssayRecord};
use serde::{Deserialize, Serialize};

use super::{column, csv_error, csv_reader, csv_writer, finish_csv};
use crate::error::{CliError, CliResult, Context};

/// Column names of a delimited corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    pub id_column: String,
    pub text_column: String,
    /// Optional in the file; rows with an empty cell are unscored.
    pub score_column: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self { id_column: "essay_id".into(), text_column: "full_text".into(), score_column: "score".into() }
    }
}

/// Reads a header'd CSV corpus; malformed rows are reported with their line.
pub fn load_corpus(path: &Path, schema: &ColumnSchema) -> CliResult<Corpus> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let id_col = column(&headers, &schema.id_column, path)?;
    let text_col = column(&headers, &schema.text_column, path)?;
    let score_col = headers.iter().position(|h| h == schema.score_column);

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let id = row.get(id_col).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(CliError::format(path, format!("line {line}: empty essay id")));
        }
        if !seen.insert(id.clone()) {
            return Err(CliError::format(path, format!("line {line}: duplicate essay id `{id}`")));
        }
        let score = match score_col.map(|c| row.get(c).unwrap_or("").trim()) {
            None | Some("") => None,
            Some(cell) => {
                let s: i64 = cell
                    .parse()
                    .map_err(|_| CliError::format(path, format!("line {line}: score `{cell}` is not an integer")))?;
                if !(1..=6).contains(&s) {
                    return Err(CliError::format(path, format!("line {line}: score {s} out of range 1..=6")));
                }
                Some(s as u8)
            }
        };
        records.push(EssayRecord { essay_id: id, text: row.get(text_col).unwrap_or("").to_string(), score });
    }
    Corpus::new(records).context(path.display().to_string())
}

pub fn write_corpus(path: &Path, corpus: &Corpus, schema: &ColumnSchema) -> CliResult<()> {
    let mut w = csv_writer();
    let wr = |e: csv::Error| CliError::format(path, e.to_string());
    w.write_record([&schema.id_column, &schema.text_column, &schema.score_column]).map_err(wr)?;
    for r in corpus.records() {
        let score = r.score.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([r.essay_id.as_str(), r.text.as_str(), score.as_str()]).map_err(wr)?;
    }
    finish_csv(path, w)
}
