//! Stable seed derivation.
//!
//! Every random stream in a run is addressed by a path of integers below the
//! master seed, so results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for the top-level consumers of the master seed.
pub mod stream {
    pub const DEMOS: u64 = 0x6465_6d6f;
    pub const MASKS: u64 = 0x6d61_736b;
    pub const JOBS: u64 = 0x6a6f_6273;
    pub const PROBE: u64 = 0x7072_6f62;
    pub const CURVES: u64 = 0x6375_7276;
    pub const TRANSFER: u64 = 0x7472_6e73;
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed `index` of `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
