//! Named, column-major feature matrix: the input format of every learner.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Column {
    Dense(Vec<f64>),
    /// Explicit entries only; `rows` strictly increasing, all other rows are 0.
    Sparse { rows: Vec<u32>, values: Vec<f64> },
}

impl Column {
    pub fn get(&self, row: usize) -> f64 {
        match self {
            Column::Dense(v) => v[row],
            Column::Sparse { rows, values } => match rows.binary_search(&(row as u32)) {
                Ok(k) => values[k],
                Err(_) => 0.0,
            },
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Column::Sparse { .. })
    }

    /// Materialise into a dense vector of `n_rows` values.
    pub fn to_dense(&self, n_rows: usize) -> Vec<f64> {
        match self {
            Column::Dense(v) => v.clone(),
            Column::Sparse { rows, values } => {
                let mut out = vec![0.0; n_rows];
                for (&r, &v) in rows.iter().zip(values) {
                    out[r as usize] = v;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    column_names: Vec<String>,
    row_ids: Vec<String>,
    columns: Vec<Column>,
}

impl FeatureMatrix {
    pub fn new(column_names: Vec<String>, row_ids: Vec<String>, columns: Vec<Column>) -> Result<Self> {
        if column_names.len() != columns.len() {
            return Err(Error::Shape { expected: column_names.len(), got: columns.len() });
        }
        let n = row_ids.len();
        let mut seen = BTreeSet::new();
        for id in &row_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        for (name, col) in column_names.iter().zip(&columns) {
            match col {
                Column::Dense(v) if v.len() != n => {
                    return Err(Error::invalid(format!("column `{name}` has {} rows, expected {n}", v.len())));
                }
                Column::Sparse { rows, values } => {
                    if rows.len() != values.len() {
                        return Err(Error::invalid(format!("column `{name}`: index/value length differ")));
                    }
                    if rows.windows(2).any(|w| w[0] >= w[1]) || rows.last().is_some_and(|&r| r as usize >= n) {
                        return Err(Error::invalid(format!("column `{name}`: bad sparse row indices")));
                    }
                }
                _ => {}
            }
        }
        Ok(Self { column_names, row_ids, columns })
    }

    pub fn from_dense_rows(column_names: Vec<String>, row_ids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let width = column_names.len();
        if rows.len() != row_ids.len() {
            return Err(Error::Shape { expected: row_ids.len(), got: rows.len() });
        }
        let mut columns = vec![Vec::with_capacity(rows.len()); width];
        for row in rows {
            if row.len() != width {
                return Err(Error::Shape { expected: width, got: row.len() });
            }
            for (c, &v) in row.iter().enumerate() {
                columns[c].push(v);
            }
        }
        Self::new(column_names, row_ids, columns.into_iter().map(Column::Dense).collect())
    }

    /// Build sparse columns from per-row `(column, value)` lists.
    pub fn from_sparse_rows(column_names: Vec<String>, row_ids: Vec<String>, rows: &[Vec<(u32, f64)>]) -> Result<Self> {
        let width = column_names.len();
        if rows.len() != row_ids.len() {
            return Err(Error::Shape { expected: row_ids.len(), got: rows.len() });
        }
        let mut idx: Vec<Vec<u32>> = vec![Vec::new(); width];
        let mut val: Vec<Vec<f64>> = vec![Vec::new(); width];
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                let c = c as usize;
                if c >= width {
                    return Err(Error::Shape { expected: width, got: c + 1 });
                }
                if v != 0.0 {
                    idx[c].push(r as u32);
                    val[c].push(v);
                }
            }
        }
        let columns = idx.into_iter().zip(val).map(|(rows, values)| Column::Sparse { rows, values }).collect();
        Self::new(column_names, row_ids, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, c: usize) -> &Column {
        &self.columns[c]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.columns[col].get(row)
    }

    pub fn row_dense(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.get(row)).collect()
    }

    /// Dense row-major copy of the selected rows.
    pub fn dense_rows(&self, rows: &[usize]) -> Vec<f64> {
        let width = self.n_cols();
        let mut out = vec![0.0; rows.len() * width];
        for (c, col) in self.columns.iter().enumerate() {
            match col {
                Column::Dense(v) => {
                    for (k, &r) in rows.iter().enumerate() {
                        out[k * width + c] = v[r];
                    }
                }
                Column::Sparse { .. } => {
                    for (k, &r) in rows.iter().enumerate() {
                        out[k * width + c] = col.get(r);
                    }
                }
            }
        }
        out
    }

    pub fn row_index(&self) -> BTreeMap<&str, usize> {
        self.row_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect()
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let n = self.n_rows();
        let mut new_pos: Vec<Option<u32>> = vec![None; n];
        for (k, &r) in rows.iter().enumerate() {
            if r >= n {
                return Err(Error::Shape { expected: n, got: r + 1 });
            }
            new_pos[r] = Some(k as u32);
        }
        let columns = self
            .columns
            .iter()
            .map(|col| match col {
                Column::Dense(v) => Column::Dense(rows.iter().map(|&r| v[r]).collect()),
                Column::Sparse { rows: idx, values } => {
                    let mut pairs: Vec<(u32, f64)> = idx
                        .iter()
                        .zip(values)
                        .filter_map(|(&r, &v)| new_pos[r as usize].map(|p| (p, v)))
                        .collect();
                    pairs.sort_unstable_by_key(|p| p.0);
                    let (rows, values) = pairs.into_iter().unzip();
                    Column::Sparse { rows, values }
                }
            })
            .collect();
        let row_ids = rows.iter().map(|&r| self.row_ids[r].clone()).collect();
        Self::new(self.column_names.clone(), row_ids, columns)
    }

    /// Subset of rows by essay id, in the given order.
    pub fn select_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self> {
        let index = self.row_index();
        let rows = ids
            .iter()
            .map(|id| {
                index
                    .get(id.as_ref())
                    .copied()
                    .ok_or_else(|| Error::RowMismatch(format!("essay `{}` not in feature matrix", id.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        self.select_rows(&rows)
    }

    /// Horizontal concatenation; every part must carry identical row ids in
    /// identical order.
    pub fn hstack(parts: &[FeatureMatrix]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::invalid("no feature parts"))?;
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for (k, part) in parts.iter().enumerate() {
            if part.row_ids != first.row_ids {
                let a: BTreeSet<&String> = first.row_ids.iter().collect();
                let b: BTreeSet<&String> = part.row_ids.iter().collect();
                let what = if a == b { "same ids, different order" } else { "different id sets" };
                return Err(Error::RowMismatch(format!("part {k}: {what}")));
            }
            names.extend(part.column_names.iter().cloned());
            columns.extend(part.columns.iter().cloned());
        }
        Self::new(names, first.row_ids.clone(), columns)
    }
}

/// Prefix every column name with `source/`.
pub fn prefixed(source: &str, names: impl IntoIterator<Item = impl AsRef<str>>) -> Vec<String> {
    names.into_iter().map(|n| format!("{source}/{}", n.as_ref())).collect()
}
