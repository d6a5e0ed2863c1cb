//! Seeded random streams.
//!
//! Every trial of every experiment draws from its own ChaCha8 stream whose
//! seed is derived from the master seed and the trial coordinates, so a
//! single row of any report can be reproduced in isolation and trials can
//! run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of coordinates (cell, trial, ...).
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// The random stream for a derived seed.
pub fn stream(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shorthand for `stream(derive_seed(master, path))`.
pub fn trial_stream(master: u64, path: &[u64]) -> TrialRng {
    stream(derive_seed(master, path))
}
