//! Random-access randomness derived from a single master seed.
//!
//! Every random value is a pure function of `(master_seed, purpose, stream,
//! index)`: the seed keys a ChaCha8 generator, `(purpose, stream)` selects
//! its stream and `index` its word position. Any value can therefore be
//! fetched in O(1) without replaying earlier draws, and results are identical
//! on every platform.

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::OracleParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u32)]
pub enum Purpose {
    Phase = 1,
    WalkLength = 2,
    ThresholdSample = 3,
    CutProbe = 4,
    TesterSample = 5,
    EstimatorSample = 6,
    Reseed = 7,
}

#[derive(Clone, Debug)]
pub struct SeedContext {
    master_seed: u64,
    params: Arc<OracleParams>,
}

impl SeedContext {
    pub fn new(master_seed: u64, params: OracleParams) -> Self {
        Self { master_seed, params: Arc::new(params) }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn params(&self) -> &OracleParams {
        &self.params
    }

    /// Same parameters, different seed.
    pub fn with_seed(&self, master_seed: u64) -> Self {
        Self { master_seed, params: Arc::clone(&self.params) }
    }

    pub fn draw_u64(&self, purpose: Purpose, stream: u32, index: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(((purpose as u64) << 32) | stream as u64);
        rng.set_word_pos(index as u128 * 2);
        rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn draw_unit(&self, purpose: Purpose, stream: u32, index: u64) -> f64 {
        unit_from_bits(self.draw_u64(purpose, stream, index))
    }

    /// Uniform in `0..bound` (`bound > 0`).
    pub fn draw_below(&self, purpose: Purpose, stream: u32, index: u64, bound: usize) -> usize {
        scale_below(self.draw_u64(purpose, stream, index), bound)
    }

    /// Phase `h_v = min(X, h̄)` with `X ~ Geo(δ)` on `{1, 2, ...}`.
    pub fn phase_of(&self, v: usize) -> usize {
        let u = self.draw_unit(Purpose::Phase, 0, v as u64);
        phase_from_uniform(u, self.params.delta, self.params.h_bar)
    }

    /// Walk length `t_v`, uniform in `1..=ℓ`.
    pub fn walk_len_of(&self, v: usize) -> usize {
        1 + self.draw_below(Purpose::WalkLength, 0, v as u64, self.params.ell)
    }

    /// Processing-order key: phase first, then id.
    pub fn order_key(&self, v: usize) -> (usize, usize) {
        (self.phase_of(v), v)
    }

    /// Strict total order `u ≺ v`. `None` when `u == v`.
    pub fn precedes(&self, u: usize, v: usize) -> Option<bool> {
        (u != v).then(|| self.order_key(u) < self.order_key(v))
    }
}

pub fn unit_from_bits(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Multiply-shift reduction of a 64-bit draw into `0..bound`.
pub fn scale_below(x: u64, bound: usize) -> usize {
    assert!(bound > 0);
    ((x as u128 * bound as u128) >> 64) as usize
}

/// Inverse-CDF geometric draw, capped at `h_bar`. `u` is uniform in `[0, 1]`.
pub fn phase_from_uniform(u: f64, delta: f64, h_bar: usize) -> usize {
    if delta >= 1.0 {
        return 1;
    }
    // P[X > j] = (1-δ)^j, so X = 1 + ⌊ln(1-u) / ln(1-δ)⌋.
    let x = (1.0 - u).ln() / (1.0 - delta).ln();
    if !x.is_finite() || x >= h_bar as f64 {
        return h_bar;
    }
    (1 + x.floor() as usize).min(h_bar)
}
