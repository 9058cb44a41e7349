//! Deterministic derivation of independent random streams.
//!
//! Every random decision in a Monte-Carlo trial (error sampling, layer
//! shuffling of the initial decoder, each post-processing attempt, random
//! check selection) draws from its own stream, keyed by a chain of integer
//! tags hashed into the master seed. Results are therefore independent of
//! execution order and of how trials are distributed over workers.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag for channel error sampling within a trial.
pub const STREAM_ERROR: u64 = 1;
/// Stream tag for the initial decoder of a trial.
pub const STREAM_INITIAL: u64 = 2;
/// Stream tag for random check selection.
pub const STREAM_SELECT: u64 = 3;
/// Base tag for post-processing attempts; attempt `k` uses `STREAM_ATTEMPT_BASE + k`.
pub const STREAM_ATTEMPT_BASE: u64 = 16;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a chain of tags into a seed, producing a derived seed.
pub fn mix(seed: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &t in tags {
        h = splitmix64(h ^ splitmix64(t));
    }
    h
}

/// Builds the random generator for a derived seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of trial `trial` at sweep point `point` under `master`.
pub fn trial_seed(master: u64, point: usize, trial: u64) -> u64 {
    mix(master, &[point as u64, trial])
}
