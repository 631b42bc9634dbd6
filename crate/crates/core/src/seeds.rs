//! Deterministic seed derivation.
//!
//! Every stochastic component takes an explicit `u64` seed and derives
//! independent child streams with [`child`]. Parallel loops derive one seed
//! per work item, so results do not depend on the worker-pool size.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step; good enough to decorrelate seed lattices.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a salt.
pub fn child(seed: u64, salt: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(salt)))
}

/// RNG for a derived stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for a derived child stream.
pub fn child_rng(seed: u64, salt: u64) -> ChaCha8Rng {
    rng(child(seed, salt))
}
