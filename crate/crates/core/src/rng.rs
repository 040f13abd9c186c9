//! Seeded random source shared by every stochastic component.
//!
//! The generator is ChaCha20 keyed through `seed_from_u64`; a uniform draw on
//! `[0, 1)` takes the top 53 bits of one `u64` output and scales by `2^-53`.
//! Both steps are fully specified, so another implementation can regenerate
//! the same β matrices, splits and search configurations from a seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type WideRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> WideRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Uniform draw on the half-open interval `[0, 1)`.
pub fn unit_uniform(rng: &mut WideRng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `[lo, hi]` (inclusive).
pub fn uniform_int(rng: &mut WideRng, lo: usize, hi: usize) -> usize {
    debug_assert!(lo <= hi);
    let span = (hi - lo + 1) as f64;
    lo + ((unit_uniform(rng) * span) as usize).min(hi - lo)
}

pub fn uniform_range(rng: &mut WideRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_uniform(rng)
}

pub fn log_uniform(rng: &mut WideRng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * unit_uniform(rng)).exp()
}

/// Fisher-Yates shuffle driven by [`uniform_int`], independent of `rand`'s
/// own slice shuffling so the permutation is stable across crate versions.
pub fn shuffle<T>(rng: &mut WideRng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_int(rng, 0, i);
        items.swap(i, j);
    }
}
