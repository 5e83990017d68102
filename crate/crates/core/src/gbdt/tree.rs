use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::binning::{BinnedColumn, BinnedMatrix, HistogramBinning};
use super::split::{find_best_split, SplitCandidate, SplitParams};
use super::Growth;

/// Thresholds are written as decimal strings with 17 significant digits.
mod decimal17 {
    use alloc::format;
    use alloc::string::String;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:.16e}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    /// Rows with `value <= threshold` go to `left`.
    Split {
        feature: u32,
        #[serde(with = "decimal17")]
        threshold: f64,
        left: u32,
        right: u32,
        gain: f64,
        n_samples: u32,
    },
    Leaf {
        weight: f64,
        n_samples: u32,
    },
}

/// Binary tree stored as a preorder node list, root first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn constant(weight: f64) -> Self {
        Self { nodes: vec![Node::Leaf { weight, n_samples: 0 }] }
    }

    pub fn predict(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { weight, .. } => return *weight,
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if value(*feature as usize) <= *threshold { *left } else { *right } as usize;
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left as usize).max(go(nodes, *right as usize)),
            }
        }
        go(&self.nodes, 0)
    }
}

pub(crate) struct GrowContext<'a> {
    pub binned: &'a BinnedMatrix,
    pub binning: &'a HistogramBinning,
    pub params: SplitParams,
    pub growth: Growth,
    pub learning_rate: f64,
}

struct Pending {
    rows: Vec<u32>,
    g: f64,
    h: f64,
    best: Option<SplitCandidate>,
    children: Option<(usize, usize, SplitCandidate)>,
}

fn row_bin(col: &BinnedColumn, r: u32) -> u8 {
    match col {
        BinnedColumn::Dense(b) => b[r as usize],
        BinnedColumn::Sparse { rows, bins, zero_bin } => match rows.binary_search(&r) {
            Ok(k) => bins[k],
            Err(_) => *zero_bin,
        },
    }
}

impl GrowContext<'_> {
    fn pending(&self, rows: Vec<u32>, g: &[f64], h: &[f64], columns: &[usize]) -> Pending {
        let (gs, hs) = rows.iter().fold((0.0, 0.0), |(a, b), &r| (a + g[r as usize], b + h[r as usize]));
        let best = find_best_split(self.binned, self.binning, &rows, g, h, columns, &self.params).filter(|s| s.gain > 0.0);
        Pending { rows, g: gs, h: hs, best, children: None }
    }

    fn split(&self, arena: &mut Vec<Pending>, idx: usize, g: &[f64], h: &[f64], columns: &[usize]) -> (usize, usize) {
        let cand = arena[idx].best.expect("split requested on a leaf without candidate");
        let col = &self.binned.columns[cand.feature];
        let rows = core::mem::take(&mut arena[idx].rows);
        let (left, right): (Vec<u32>, Vec<u32>) = rows.iter().partition(|&&r| row_bin(col, r) <= cand.bin);
        let l = arena.len();
        arena.push(self.pending(left, g, h, columns));
        arena.push(self.pending(right, g, h, columns));
        arena[idx].rows = rows;
        arena[idx].children = Some((l, l + 1, cand));
        (l, l + 1)
    }

    /// Grow one tree on `rows` for a single output's gradients.
    pub fn grow(&self, rows: Vec<u32>, g: &[f64], h: &[f64], columns: &[usize]) -> Tree {
        let mut arena = vec![self.pending(rows, g, h, columns)];
        match self.growth {
            Growth::LeafWise { max_leaves } => {
                let mut leaves = vec![0usize];
                while leaves.len() < max_leaves {
                    let mut pick: Option<(usize, f64)> = None;
                    for (pos, &i) in leaves.iter().enumerate() {
                        if let Some(b) = arena[i].best {
                            if pick.is_none_or(|(_, gain)| b.gain > gain) {
                                pick = Some((pos, b.gain));
                            }
                        }
                    }
                    let Some((pos, _)) = pick else { break };
                    let idx = leaves.remove(pos);
                    let (l, r) = self.split(&mut arena, idx, g, h, columns);
                    leaves.insert(pos, r);
                    leaves.insert(pos, l);
                }
            }
            Growth::DepthWise { max_depth } => {
                let mut frontier = vec![0usize];
                for _ in 0..max_depth {
                    let mut next = Vec::new();
                    for idx in frontier {
                        if arena[idx].best.is_some() {
                            let (l, r) = self.split(&mut arena, idx, g, h, columns);
                            next.push(l);
                            next.push(r);
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    frontier = next;
                }
            }
        }
        self.to_preorder(&arena)
    }

    fn to_preorder(&self, arena: &[Pending]) -> Tree {
        let lambda = self.params.lambda_l2;
        let mut nodes = Vec::with_capacity(arena.len());
        // (arena index, parent slot to patch, is_left)
        let mut stack: Vec<(usize, Option<(usize, bool)>)> = vec![(0, None)];
        while let Some((idx, parent)) = stack.pop() {
            let slot = nodes.len() as u32;
            if let Some((p, is_left)) = parent {
                if let Node::Split { left, right, .. } = &mut nodes[p] {
                    if is_left {
                        *left = slot;
                    } else {
                        *right = slot;
                    }
                }
            }
            let p = &arena[idx];
            let n_samples = p.rows.len() as u32;
            match p.children {
                Some((l, r, cand)) => {
                    nodes.push(Node::Split {
                        feature: cand.feature as u32,
                        threshold: cand.threshold,
                        left: 0,
                        right: 0,
                        gain: cand.gain,
                        n_samples,
                    });
                    let me = slot as usize;
                    stack.push((r, Some((me, false))));
                    stack.push((l, Some((me, true))));
                }
                None => {
                    let denom = p.h + lambda;
                    let weight = if denom > 0.0 { -p.g / denom * self.learning_rate } else { 0.0 };
                    nodes.push(Node::Leaf { weight, n_samples });
                }
            }
        }
        Tree { nodes }
    }
}
