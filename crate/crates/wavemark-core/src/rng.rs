//! Seeded randomness helpers. Every stochastic operation in this crate draws
//! from a ChaCha8 stream created here, so a (seed, operation) pair fixes the
//! output bit-for-bit across runs and platforms.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample in [0, 1) with 53 bits of precision.
#[inline]
pub fn uniform_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in [0, bound) via the widening-multiply reduction.
/// The bias is below 2^-53 for the bounds used here (image pixel counts).
#[inline]
pub fn uniform_index(rng: &mut impl RngCore, bound: usize) -> usize {
    debug_assert!(bound > 0);
    (((rng.next_u64() as u128) * (bound as u128)) >> 64) as usize
}

/// Standard normal deviates via Box-Muller, one pair per two uniforms.
pub struct NormalSource<R: RngCore> {
    rng: R,
    spare: Option<f64>,
}

impl<R: RngCore> NormalSource<R> {
    pub fn new(rng: R) -> Self {
        NormalSource { rng, spare: None }
    }

    pub fn next(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        // u1 in (0, 1] keeps the log argument nonzero.
        let u1 = 1.0 - uniform_f64(&mut self.rng);
        let u2 = uniform_f64(&mut self.rng);
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

/// First k entries of a seeded Fisher-Yates shuffle of 0..n: k distinct
/// indices, uniform without replacement.
pub fn sample_distinct(rng: &mut impl RngCore, n: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + uniform_index(rng, n - i);
        indices.swap(i, j);
    }
    indices.truncate(k);
    indices
}
