//! Seed derivation for independent chains.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream owned by every chain.
pub type ChainRng = ChaCha8Rng;

/// Mixes a master seed with a task index (SplitMix64 finalizer applied to
/// both words) so that sibling tasks get decorrelated streams regardless of
/// scheduling order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ mix(index.wrapping_add(0x9E37_79B9_7F4A_7C15));
    z = mix(z);
    z
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn chain_rng(seed: u64) -> ChainRng {
    ChaCha8Rng::seed_from_u64(seed)
}
