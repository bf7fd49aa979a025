//! Seed splitting.
//!
//! Every random stream is derived from one root seed and a path of `u64`
//! labels (stream tag, row index, ...). Derivation chains SplitMix64 finalizers,
//! so a stream depends only on its path, never on the order in which streams
//! are consumed. That keeps parallel row solves reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags used by the sketching code. Stable across releases: changing one
/// changes every sketch produced from a given seed.
pub mod tag {
    pub const JL_COORDS_ALL: u64 = 0x01;
    pub const JL_COORDS_S: u64 = 0x02;
    pub const JL_COORDS_T: u64 = 0x03;
    pub const JL_COORDS_O: u64 = 0x04;
    pub const APP_DIAG: u64 = 0x10;
    pub const FIEDLER: u64 = 0x20;
    pub const FAST_ROUND: u64 = 0x30;
    pub const BASELINE_RANDOM: u64 = 0x40;
    pub const COUNTEREXAMPLE: u64 = 0x50;
    pub const NETGEN: u64 = 0x60;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `root` and a label path.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(root), |acc, &label| {
        splitmix64(acc ^ splitmix64(label))
    })
}

/// A ChaCha8 generator for the stream at `path` under `root`.
pub fn stream(root: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, path))
}
