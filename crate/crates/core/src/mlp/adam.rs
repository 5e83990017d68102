use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { step_size: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Adaptive-moment state for one flat parameter tensor.
#[derive(Debug, Clone)]
pub struct Adam {
    params: AdamParams,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(params: AdamParams, len: usize) -> Self {
        Self { params, m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    /// Bias-corrected update. With zero moments a zero gradient leaves
    /// `theta` bit-for-bit unchanged.
    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let AdamParams { step_size, beta1, beta2, epsilon } = self.params;
        let c1 = 1.0 - libm::pow(beta1, f64::from(self.t));
        let c2 = 1.0 - libm::pow(beta2, f64::from(self.t));
        for i in 0..theta.len() {
            let g = grad[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            theta[i] -= step_size * m_hat / (libm::sqrt(v_hat) + epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut theta = vec![0.3, -1.5, 0.0, -0.0, 1e300];
        let before = theta.clone();
        let mut opt = Adam::new(AdamParams::default(), theta.len());
        for _ in 0..5 {
            opt.step(&mut theta, &[0.0; 5]);
        }
        for (a, b) in theta.iter().zip(&before) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn first_step_moves_by_step_size() {
        let mut theta = vec![1.0];
        let mut opt = Adam::new(AdamParams::default(), 1);
        opt.step(&mut theta, &[0.25]);
        assert!((theta[0] - (1.0 - 0.001)).abs() < 1e-9);
    }
}
