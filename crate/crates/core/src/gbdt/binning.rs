//! Quantile histogram binning.
//!
//! Each feature gets strictly increasing cut points; a value `v` falls in bin
//! `b` = number of cuts below `v`, so bin `b` holds `cut[b-1] < v <= cut[b]`.
//! Columns with at most `max_bins` distinct training values get one bin per
//! value (cuts at midpoints), which makes histogram split search exact.
//! Sparse columns keep exact zero in a bin of its own.

use alloc::vec::Vec;

use crate::{Column, Error, FeatureMatrix, Result};

/// Midpoint of two distinct values, never equal to the upper one.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = 0.5 * (lo + hi);
    if m >= hi {
        lo
    } else {
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBins {
    cuts: Vec<f64>,
    zero_bin: Option<u8>,
}

impl FeatureBins {
    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn n_bins(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn bin(&self, v: f64) -> u8 {
        self.cuts.partition_point(|&c| c < v) as u8
    }

    /// Upper boundary of bin `b`: split "left if value <= threshold".
    pub fn threshold(&self, b: usize) -> f64 {
        self.cuts[b]
    }

    pub fn zero_bin(&self) -> Option<u8> {
        self.zero_bin
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBinning {
    pub features: Vec<FeatureBins>,
    pub max_bins: usize,
}

fn quantile_cuts(sorted: &[f64], n_target: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut cuts: Vec<f64> = Vec::new();
    for k in 1..n_target {
        let idx = libm::round(k as f64 * n as f64 / n_target as f64) as usize;
        let idx = idx.clamp(1, n - 1);
        let (lo, hi) = (sorted[idx - 1], sorted[idx]);
        if lo < hi {
            let c = midpoint(lo, hi);
            if cuts.last().is_none_or(|&last| c > last) {
                cuts.push(c);
            }
        }
    }
    cuts
}

fn column_bins(column: &Column, n_rows: usize, max_bins: usize) -> FeatureBins {
    let (mut values, sparse) = match column {
        Column::Dense(v) => (v.clone(), false),
        Column::Sparse { values, .. } => {
            let mut all: Vec<f64> = values.iter().copied().filter(|&v| v != 0.0).collect();
            all.resize(n_rows, 0.0);
            (all, true)
        }
    };
    values.sort_by(f64::total_cmp);
    let mut distinct = values.clone();
    distinct.dedup();

    let cuts = if distinct.len() <= max_bins {
        distinct.windows(2).map(|w| midpoint(w[0], w[1])).collect()
    } else if sparse && values.contains(&0.0) {
        let below = distinct.iter().copied().filter(|&v| v < 0.0).next_back();
        let above = distinct.iter().copied().find(|&v| v > 0.0);
        let lo_edge = below.map(|b| midpoint(b, 0.0));
        let hi_edge = above.map(|a| midpoint(0.0, a));
        let mut cuts: Vec<f64> = quantile_cuts(&values, max_bins - 2)
            .into_iter()
            .filter(|&c| lo_edge.is_none_or(|e| c < e) && hi_edge.is_none_or(|e| c > e))
            .collect();
        cuts.extend(lo_edge);
        cuts.extend(hi_edge);
        cuts.sort_by(f64::total_cmp);
        cuts
    } else {
        quantile_cuts(&values, max_bins)
    };
    let mut bins = FeatureBins { cuts, zero_bin: None };
    if sparse {
        bins.zero_bin = Some(bins.bin(0.0));
    }
    bins
}

/// Cut points for every column of the training matrix.
pub fn build_bins(matrix: &FeatureMatrix, max_bins: usize) -> Result<HistogramBinning> {
    if matrix.n_rows() == 0 || matrix.n_cols() == 0 {
        return Err(Error::invalid("cannot bin an empty matrix"));
    }
    if !(2..=256).contains(&max_bins) {
        return Err(Error::invalid("max_bins must be in 2..=256"));
    }
    let features = matrix.columns().iter().map(|c| column_bins(c, matrix.n_rows(), max_bins)).collect();
    Ok(HistogramBinning { features, max_bins })
}

#[derive(Debug, Clone, PartialEq)]
pub enum BinnedColumn {
    Dense(Vec<u8>),
    /// Rows not listed sit in `zero_bin`.
    Sparse { rows: Vec<u32>, bins: Vec<u8>, zero_bin: u8 },
}

/// Training matrix with every value replaced by its bin index.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMatrix {
    pub n_rows: usize,
    pub columns: Vec<BinnedColumn>,
}

impl BinnedMatrix {
    pub fn new(matrix: &FeatureMatrix, binning: &HistogramBinning) -> Result<Self> {
        if matrix.n_cols() != binning.features.len() {
            return Err(Error::Shape { expected: binning.features.len(), got: matrix.n_cols() });
        }
        let columns = matrix
            .columns()
            .iter()
            .zip(&binning.features)
            .map(|(col, fb)| match (col, fb.zero_bin) {
                (Column::Sparse { rows, values }, Some(zero_bin)) => {
                    let (rows, bins) = rows
                        .iter()
                        .zip(values)
                        .filter(|(_, &v)| v != 0.0)
                        .map(|(&r, &v)| (r, fb.bin(v)))
                        .unzip();
                    BinnedColumn::Sparse { rows, bins, zero_bin }
                }
                _ => BinnedColumn::Dense(col.to_dense(matrix.n_rows()).into_iter().map(|v| fb.bin(v)).collect()),
            })
            .collect();
        Ok(Self { n_rows: matrix.n_rows(), columns })
    }
}
