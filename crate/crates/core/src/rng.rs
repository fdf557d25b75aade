//! Seeded deterministic randomness.
//!
//! Draws come from ChaCha8, which produces the same stream on every
//! platform for a given seed. Per-program and per-mutant seeds are derived
//! from a campaign seed with [`derive_seed`].

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ALGORITHM: &str = "chacha8";

#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
    draws: u64,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        Rng { inner: ChaCha8Rng::seed_from_u64(seed), draws: 0 }
    }

    /// Number of draws taken so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn range(&mut self, r: RangeInclusive<usize>) -> usize {
        self.draws += 1;
        if r.start() >= r.end() {
            return *r.start();
        }
        self.inner.gen_range(r)
    }

    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        self.range(0..=n - 1)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.draws += 1;
        if p <= 0.0 {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        self.inner.gen_bool(p)
    }

    pub fn coin(&mut self) -> bool {
        self.chance(0.5)
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> Option<&'a T> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.below(items.len())])
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        self.draws += 1;
        items.shuffle(&mut self.inner);
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.gen()
    }
}

/// SplitMix64 finalizer over `base + stream * golden`. Distinct streams of
/// the same base give well-separated seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
