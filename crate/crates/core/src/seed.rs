//! Seed handling.
//!
//! Every stochastic routine takes a 64-bit seed. Independent streams are
//! derived with [`split`], which mixes the parent seed and a stream index
//! through SplitMix64:
//!
//! ```text
//! split(seed, stream) = mix(seed ^ mix(stream + 0x9E3779B97F4A7C15))
//! ```
//!
//! Replicate `r` of an experiment always uses `split(seed, r)`, so results do
//! not depend on how replicates are scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn split(seed: u64, stream: u64) -> u64 {
    mix(seed ^ mix(stream.wrapping_add(GOLDEN)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    rng(split(seed, stream))
}
