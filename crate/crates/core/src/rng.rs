//! Seed fan-out.
//!
//! A single user seed drives everything. Each consumer draws from its own
//! ChaCha8 stream of that seed, selected by one of the constants below, so
//! adding a consumer never shifts another consumer's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_WEIGHT_INIT: u64 = 1;
pub const STREAM_DROPOUT: u64 = 2;
pub const STREAM_SPLIT: u64 = 3;
pub const STREAM_ATTACKER_SAMPLE: u64 = 4;
pub const STREAM_SURROGATE_VAL: u64 = 5;
pub const STREAM_SHADOW_SUBSAMPLE: u64 = 6;
pub const STREAM_SYNTHETIC: u64 = 7;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed for a named sub-task (victim vs surrogate training
/// under one run seed). SplitMix64 finalizer over `seed ^ tag`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub const TAG_VICTIM: u64 = 0x7669_6374;
pub const TAG_SURROGATE: u64 = 0x7375_7267;
pub const TAG_SHADOW_MODEL: u64 = 0x7368_6477;
pub const TAG_ATTACK_MLP: u64 = 0x6d6c_7021;
