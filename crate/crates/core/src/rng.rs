//! Seed derivation and parameter draws.
//!
//! All randomness flows from ChaCha20 streams seeded with 64-bit values; run
//! seeds are derived from a master seed with SplitMix64 mixing.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Identifies the generator in manifests.
pub const RNG_NAME: &str = "ChaCha20Rng(rand_chacha 0.3, seed_from_u64) + rand 0.8 uniform f64";

pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seed from `(master, setting, run)`.
pub fn derive_seed(master: u64, setting: u64, run: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ setting) ^ run)
}

pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `count` draws from uniform `[-scale·π, scale·π]`.
pub fn uniform_angles(rng: &mut impl Rng, count: usize, scale: f64) -> Vec<f64> {
    (0..count).map(|_| scale * rng.gen_range(-PI..=PI)).collect()
}
