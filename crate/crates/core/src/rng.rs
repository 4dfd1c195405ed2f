//! Seeded random number generation for simulations.
//!
//! Every stochastic component draws from [`SimRng`], a ChaCha8 stream cipher
//! generator. ChaCha has a fixed, platform-independent output stream, so a
//! `(seed, call sequence)` pair reproduces bit-identical draws anywhere.
//! Replicate streams are derived with [`mix_seed`], a splitmix64 chain:
//!
//! ```text
//! seed(master, a, b) = splitmix64(splitmix64(splitmix64(master) ^ a) ^ b)
//! ```
//!
//! The mix constants are the splitmix64 reference constants, frozen here so
//! regression fixtures stay valid.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One step of splitmix64: a full-avalanche 64-bit mix.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a stream seed from a master seed and two indices
/// (e.g. schedule index and replicate index).
#[inline]
pub fn mix_seed(master: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ a) ^ b)
}

/// Simulation RNG: deterministic ChaCha8 stream with convenience variates.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in the half-open interval `[lo, hi)`.
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Exponential waiting time with the given rate (mean `1/rate`).
    ///
    /// Uses `-ln(1-U)` so the argument of `ln` is in `(0, 1]`.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        -(1.0 - self.uniform()).ln() / rate
    }

    /// Bernoulli draw with success probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
