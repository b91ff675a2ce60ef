//! Seeded randomness.
//!
//! Every random quantity in the crate comes from [`SeededRng`], which is
//! ChaCha8 keyed by a 64-bit seed through `SeedableRng::seed_from_u64`.
//! Independent tasks (table rows, Monte Carlo paths, replications) never share
//! a generator; task `i` of a run seeded with `s` uses
//! `child_seed(s, i) = splitmix64(s ^ splitmix64(i))`.
//!
//! Changing either the generator or the splitting rule changes every
//! published table, so both are fixed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent task of a run seeded with `seed`.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Generator for the `index`-th task.
pub fn child_rng(seed: u64, index: u64) -> SeededRng {
    seeded_rng(child_seed(seed, index))
}
