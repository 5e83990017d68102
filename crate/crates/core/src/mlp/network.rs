//! Dense ReLU network: forward pass and exact backpropagation of the mean
//! batch loss.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::MlpLoss;
use crate::prediction::sigmoid;
use crate::rng::StageRng;
use crate::{ordinal, Error, Result, N_CLASSES};

/// Affine layer, `weights` row-major `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, weights: vec![0.0; in_dim * out_dim], bias: vec![0.0; out_dim] }
    }

    /// He-uniform weights, zero bias.
    pub fn he_uniform(in_dim: usize, out_dim: usize, rng: &mut StageRng) -> Self {
        let limit = libm::sqrt(6.0 / in_dim as f64);
        let weights = (0..in_dim * out_dim).map(|_| rng.uniform(-limit, limit)).collect();
        Self { in_dim, out_dim, weights, bias: vec![0.0; out_dim] }
    }

    /// `out[r] = W x[r] + b` for every row of `input`.
    fn affine(&self, input: &[f64], rows: usize) -> Vec<f64> {
        let mut out = vec![0.0; rows * self.out_dim];
        for r in 0..rows {
            let x = &input[r * self.in_dim..(r + 1) * self.in_dim];
            for o in 0..self.out_dim {
                let w = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
                out[r * self.out_dim + o] = self.bias[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
}

/// Per-layer pre-activations and activations of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub rows: usize,
    /// `activations[0]` is the input; `activations[l]` the output of layer `l-1`
    /// after ReLU (the last entry holds the logits, no activation).
    pub activations: Vec<Vec<f64>>,
}

impl ForwardPass {
    pub fn logits(&self) -> &[f64] {
        self.activations.last().expect("forward pass has at least the input")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Network {
    pub fn new(layer_sizes: &[usize], rng: &mut StageRng) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::invalid("layer sizes must list input and output, all positive"));
        }
        let layers = layer_sizes.windows(2).map(|w| Layer::he_uniform(w[0], w[1], rng)).collect();
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(|l| l.out_dim));
        s
    }

    pub fn forward(&self, batch: &[f64], rows: usize) -> Result<ForwardPass> {
        if batch.len() != rows * self.input_dim() {
            return Err(Error::Shape { expected: rows * self.input_dim(), got: batch.len() });
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(batch.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.affine(activations.last().unwrap(), rows);
            if l + 1 < self.layers.len() {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(z);
        }
        Ok(ForwardPass { rows, activations })
    }

    /// Mean batch loss and its exact gradient for every parameter.
    pub fn backward(&self, pass: &ForwardPass, labels: &[u8], loss: MlpLoss) -> Result<(f64, Gradients)> {
        let rows = pass.rows;
        if labels.len() != rows {
            return Err(Error::Shape { expected: rows, got: labels.len() });
        }
        let out_dim = self.output_dim();
        let (loss_value, mut delta) = output_delta(pass.logits(), labels, out_dim, loss)?;
        let mut gw = vec![Vec::new(); self.layers.len()];
        let mut gb = vec![Vec::new(); self.layers.len()];
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &pass.activations[l];
            let mut dw = vec![0.0; layer.weights.len()];
            let mut db = vec![0.0; layer.out_dim];
            for r in 0..rows {
                let x = &input[r * layer.in_dim..(r + 1) * layer.in_dim];
                for o in 0..layer.out_dim {
                    let d = delta[r * layer.out_dim + o];
                    if d == 0.0 {
                        continue;
                    }
                    db[o] += d;
                    for (w, &xi) in dw[o * layer.in_dim..(o + 1) * layer.in_dim].iter_mut().zip(x) {
                        *w += d * xi;
                    }
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; rows * layer.in_dim];
                for r in 0..rows {
                    let p = &mut prev[r * layer.in_dim..(r + 1) * layer.in_dim];
                    for o in 0..layer.out_dim {
                        let d = delta[r * layer.out_dim + o];
                        if d == 0.0 {
                            continue;
                        }
                        for (pi, &w) in p.iter_mut().zip(&layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim]) {
                            *pi += d * w;
                        }
                    }
                }
                // ReLU derivative, taken as 0 at exactly 0.
                for (p, &a) in prev.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
            gw[l] = dw;
            gb[l] = db;
        }
        Ok((loss_value, Gradients { weights: gw, bias: gb }))
    }
}

/// Mean loss over the batch and `dL/dlogits` (already divided by batch size).
pub fn output_delta(logits: &[f64], labels: &[u8], out_dim: usize, loss: MlpLoss) -> Result<(f64, Vec<f64>)> {
    let rows = labels.len();
    if out_dim != loss.output_dim() {
        return Err(Error::Shape { expected: loss.output_dim(), got: out_dim });
    }
    let scale = 1.0 / rows.max(1) as f64;
    let mut delta = vec![0.0; logits.len()];
    let mut total = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        if !(1..=N_CLASSES as u8).contains(&label) {
            return Err(Error::ScoreOutOfRange { score: label.into(), context: Default::default() });
        }
        let z = &logits[r * out_dim..(r + 1) * out_dim];
        let d = &mut delta[r * out_dim..(r + 1) * out_dim];
        match loss {
            MlpLoss::SoftmaxCrossEntropy => {
                let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = z.iter().map(|&v| libm::exp(v - m)).sum();
                let lse = m + libm::log(sum);
                total += lse - z[usize::from(label) - 1];
                for c in 0..out_dim {
                    let p = libm::exp(z[c] - lse);
                    let y = if c + 1 == usize::from(label) { 1.0 } else { 0.0 };
                    d[c] = (p - y) * scale;
                }
            }
            MlpLoss::OrdinalBce => {
                let target = ordinal::encode(label)?;
                for c in 0..out_dim {
                    let x = z[c];
                    // softplus(x) - t x is the logistic loss on logit x.
                    let softplus = if x > 0.0 { x + libm::log1p(libm::exp(-x)) } else { libm::log1p(libm::exp(x)) };
                    total += softplus - target[c] * x;
                    d[c] = (sigmoid(x) - target[c]) * scale;
                }
            }
        }
    }
    Ok((total * scale, delta))
}
