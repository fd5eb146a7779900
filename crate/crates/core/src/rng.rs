//! Seeded random source for sampling.
//!
//! The generator is xoshiro256++ seeded through SplitMix64 (as defined by
//! `rand_xoshiro`). Floats and bounded integers are derived from raw 64-bit
//! outputs by fixed formulas so results are identical on every platform.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct SampleRng(Xoshiro256PlusPlus);

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n` by multiply-shift. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    /// Index drawn proportionally to `weights`, whose sum is `total`.
    pub fn weighted(&mut self, weights: &[f64], total: f64) -> usize {
        let mut u = self.next_f64() * total;
        for (i, &w) in weights.iter().enumerate() {
            u -= w;
            if u < 0.0 {
                return i;
            }
        }
        // rounding can leave u marginally non-negative
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}
