//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a SplitMix64 generator.
//! A replication seed `s` is split into independent substreams by tag:
//! the substream state is the first SplitMix64 output of a generator seeded
//! with `s ^ (tag * 0xD1B54A32D192ED03)`.
//!
//! Conversions:
//! - `next_f64` = `(x >> 11) * 2^-53`, uniform on `[0, 1)`.
//! - `below(n)` = `(x as u128 * n) >> 64`, uniform on `0..n` up to a bias below `n / 2^64`.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Stream tags. Instance generation uses the three `INSTANCE_*` tags;
/// the randomized gate and LP rounding draw from `GATE` and `ROUNDING`.
pub mod tag {
    pub const INSTANCE_TYPES: u64 = 0x10;
    pub const INSTANCE_COSTS: u64 = 0x11;
    pub const INSTANCE_ORDERS: u64 = 0x12;
    pub const GATE: u64 = 0x20;
    pub const ROUNDING: u64 = 0x30;
    pub const SUITE: u64 = 0x40;
}

const TAG_MIX: u64 = 0xD1B5_4A32_D192_ED03;

#[derive(Clone, Debug)]
pub struct Stream {
    inner: SplitMix64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream { inner: SplitMix64::seed_from_u64(seed) }
    }

    /// Independent substream of `seed` for the given tag.
    pub fn substream(seed: u64, tag: u64) -> Self {
        let mut root = SplitMix64::seed_from_u64(seed ^ tag.wrapping_mul(TAG_MIX));
        Stream::new(root.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Index drawn proportionally to `weights` (one draw). Falls back to the
    /// last positive weight if rounding leaves the cumulative sum short.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let target = self.next_f64() * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = i;
            if target < acc {
                return i;
            }
        }
        last
    }

    /// Fisher-Yates, swapping from the back.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}
