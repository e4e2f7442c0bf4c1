//! Seed derivation and random-number plumbing.
//!
//! Every generator takes a `u64` seed and builds a ChaCha8 stream from it, so
//! paths are reproducible across platforms. Batches derive one seed per
//! replicate with [`derive_seed`], which keeps results independent of the
//! order in which a thread pool happens to schedule replicates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `index` of a batch driven by `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Seed for a named sub-stream, e.g. the contrast runs of one study record.
pub fn derive_named(seed: u64, name: &str) -> u64 {
    name.bytes()
        .fold(mix64(seed), |acc, b| mix64(acc ^ u64::from(b)))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
