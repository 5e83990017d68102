//! Seeded randomness shared by every stage of the pipeline.
//!
//! One user seed drives the whole run. Each stage draws from its own ChaCha8
//! stream (`stream = stage << 32 | sub`), so adding draws to one stage never
//! shifts the numbers seen by another. Shuffling is an explicit Fisher–Yates
//! over Lemire's bounded integers; the pair is named [`PRNG_NAME`] in split
//! manifests and must not change without bumping the name.

use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub const PRNG_NAME: &str = "chacha8-fy/v1";

/// Stream ids for the pipeline stages.
pub mod stage {
    pub const SPLIT: u64 = 1;
    pub const GBDT: u64 = 2;
    pub const MLP_FOLDS: u64 = 3;
    pub const MLP_TRAIN: u64 = 4;
    pub const SYNTH: u64 = 5;
}

#[derive(Debug, Clone)]
pub struct StageRng {
    inner: ChaCha8Rng,
}

impl StageRng {
    pub fn new(seed: u64, stage: u64) -> Self {
        Self::with_sub(seed, stage, 0)
    }

    pub fn with_sub(seed: u64, stage: u64, sub: u32) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream((stage << 32) | u64::from(sub));
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n`. Panics when `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let mut m = u128::from(self.next_u64()) * u128::from(n);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = u128::from(self.next_u64()) * u128::from(n);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform float in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.next_f64()
    }

    /// Standard normal draw (Box–Muller, one value per call).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }

    /// In-place Fisher–Yates, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, returned in ascending order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool.sort_unstable();
        pool
    }
}
