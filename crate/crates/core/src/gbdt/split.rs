use alloc::vec;
use alloc::vec::Vec;

use super::binning::{BinnedColumn, BinnedMatrix, HistogramBinning};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitParams {
    pub lambda_l2: f64,
    pub min_samples_leaf: usize,
    pub min_gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    /// Rows with bin <= `bin` go left.
    pub bin: u8,
    /// Raw-value form of `bin`: rows with value <= `threshold` go left.
    pub threshold: f64,
    pub gain: f64,
    pub left_count: usize,
    pub right_count: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct BinStats {
    g: f64,
    h: f64,
    n: usize,
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Best histogram split of the rows of one node.
///
/// Gain is `(G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)) / 2`, maximised over
/// bin boundaries of the candidate columns; both sides need at least
/// `min_samples_leaf` rows. Ties resolve to the lower feature index, then the
/// lower threshold. `None` when no boundary reaches `min_gain`.
pub fn find_best_split(
    binned: &BinnedMatrix,
    binning: &HistogramBinning,
    rows: &[u32],
    g: &[f64],
    h: &[f64],
    columns: &[usize],
    params: &SplitParams,
) -> Option<SplitCandidate> {
    let msl = params.min_samples_leaf.max(1);
    if rows.len() < 2 * msl {
        return None;
    }
    let lambda = params.lambda_l2;
    let (g_total, h_total) = rows.iter().fold((0.0, 0.0), |(a, b), &r| (a + g[r as usize], b + h[r as usize]));
    let parent = score(g_total, h_total, lambda);
    let n_total = rows.len();

    let mut in_node: Option<Vec<bool>> = None;
    let mut hist: Vec<BinStats> = Vec::new();
    let mut best: Option<SplitCandidate> = None;

    let mut cols: Vec<usize> = columns.to_vec();
    cols.sort_unstable();
    for &f in &cols {
        let fb = &binning.features[f];
        let n_bins = fb.n_bins();
        if n_bins < 2 {
            continue;
        }
        hist.clear();
        hist.resize(n_bins, BinStats::default());
        match &binned.columns[f] {
            BinnedColumn::Dense(bins) => {
                for &r in rows {
                    let s = &mut hist[usize::from(bins[r as usize])];
                    s.g += g[r as usize];
                    s.h += h[r as usize];
                    s.n += 1;
                }
            }
            BinnedColumn::Sparse { rows: nz_rows, bins, zero_bin } => {
                let mask = in_node.get_or_insert_with(|| {
                    let mut m = vec![false; binned.n_rows];
                    rows.iter().for_each(|&r| m[r as usize] = true);
                    m
                });
                let mut acc = BinStats::default();
                for (&r, &b) in nz_rows.iter().zip(bins) {
                    if mask[r as usize] {
                        let s = &mut hist[usize::from(b)];
                        s.g += g[r as usize];
                        s.h += h[r as usize];
                        s.n += 1;
                        acc.g += g[r as usize];
                        acc.h += h[r as usize];
                        acc.n += 1;
                    }
                }
                let z = &mut hist[usize::from(*zero_bin)];
                z.g = g_total - acc.g;
                z.h = h_total - acc.h;
                z.n = n_total - acc.n;
            }
        }
        let mut left = BinStats::default();
        for b in 0..n_bins - 1 {
            left.g += hist[b].g;
            left.h += hist[b].h;
            left.n += hist[b].n;
            let right_n = n_total - left.n;
            if left.n < msl {
                continue;
            }
            if right_n < msl {
                break;
            }
            let (gr, hr) = (g_total - left.g, h_total - left.h);
            let gain = 0.5 * (score(left.g, left.h, lambda) + score(gr, hr, lambda) - parent);
            if best.is_none_or(|cur| gain > cur.gain) {
                best = Some(SplitCandidate {
                    feature: f,
                    bin: b as u8,
                    threshold: fb.threshold(b),
                    gain,
                    left_count: left.n,
                    right_count: right_n,
                });
            }
        }
    }
    best.filter(|b| b.gain >= params.min_gain)
}
