//! Counter-based random streams.
//!
//! Every draw in an analysis comes from a stream addressed by
//! `(seed, domain, index)`. The stream for a given address is the same no
//! matter which worker evaluates it or in which order, so results do not
//! depend on the size of the worker pool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Draw purpose. Distinct domains never share a keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Prior draws of the full parameter vector.
    Prior = 1,
    /// Observation draws `z ~ f(z | theta)`.
    Observation = 2,
    /// Nuisance draws for inner expectations at a grid point.
    NuisanceGrid = 3,
    /// Nuisance draws for inner expectations at an outer sample.
    NuisanceOuter = 4,
}

/// Stream for work item `index` of `domain` under `seed`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> Stream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Derives a child seed, e.g. one per sweep row.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined words
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
