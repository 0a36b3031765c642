//! Seeded pseudo-random generation.
//!
//! Generator: xoshiro256++ (Blackman and Vigna, public domain), seeded by
//! expanding a `u64` with SplitMix64. Bounded integers use Lemire's
//! multiply-and-reject method on the raw 64-bit output; unit floats take the
//! top 53 bits. All three steps are fully specified, so draws are reproducible
//! in any language.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type SimRng = Xoshiro256PlusPlus;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent stream for item `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> SimRng {
    seeded(seed ^ (index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Uniform integer in `[0, n)`; `n` must be non-zero.
pub fn uniform_index(rng: &mut impl RngCore, n: u64) -> u64 {
    assert!(n > 0, "uniform_index on empty range");
    let threshold = n.wrapping_neg() % n;
    loop {
        let m = (rng.next_u64() as u128) * (n as u128);
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
    }
}

/// Uniform float in `[0, 1)`.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
