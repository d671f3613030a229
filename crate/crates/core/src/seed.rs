//! Deterministic seed derivation.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream seeded
//! through [`mix_seed`], so a run is fully reproducible from one base seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier for the RNG and seed-derivation scheme, recorded in reports
/// and printed by `rprec --version`.
pub const RNG_ID: &str = "chacha8+splitmix64-fold/v1";

/// SplitMix64 finalizer. Standard constants; bijective on u64.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `base` one at a time: `h = splitmix64(h ^ part)`,
/// starting from `h = splitmix64(base)`. Order-sensitive by design.
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix64(base);
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

/// The crate's RNG, constructed from a derived 64-bit seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
