//! Seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by the
//! user seed, with the ChaCha stream id selecting an independent sub-sequence.
//! Stream ids are built from a purpose tag in the upper 16 bits and a replica
//! or snapshot index in the lower 48 bits, so `(seed, purpose, index)` names
//! one reproducible sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for [`stream_rng`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum Purpose {
    InitialSample = 1,
    GridSample = 2,
    Subsample = 3,
    Replica = 4,
    Jitter = 5,
}

pub fn stream_rng(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | (index & ((1 << 48) - 1)));
    rng
}

/// Seed of replica `index` derived from a base seed (SplitMix64 finalizer).
pub fn replica_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((Purpose::Replica as u64) << 56);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
