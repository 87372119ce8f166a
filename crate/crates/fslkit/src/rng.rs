//! Seed handling.
//!
//! Every randomized routine in this crate takes an explicit `u64` seed and
//! drives a `ChaCha8Rng`, which is portable across platforms and word sizes,
//! so identical seeds reproduce byte-identical outputs everywhere.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Construct the crate-standard RNG from a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent child seed from a parent seed and a stream tag.
///
/// SplitMix64 finalizer over `parent ^ tag`; used wherever one user-facing
/// seed has to fan out into several unrelated random streams (row shuffles,
/// parameter draws, per-cell benchmark seeds) without correlating them.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    let mut z = parent ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
