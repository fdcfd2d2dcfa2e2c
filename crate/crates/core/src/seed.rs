//! Deterministic seed derivation for independent RNG streams.
//!
//! A stream seed is a pure function of a master seed and a path of
//! integers (test index, variant id, ...). Each path component is folded
//! in with a SplitMix64 finalizer, so nearby paths give unrelated seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags used by the harness.
pub mod stream {
    pub const WORLD: u64 = 0x57_4f_52_4c_44;
    pub const CONTROLLER: u64 = 0x43_54_52_4c;
    pub const POD_TRAINING: u64 = 0x50_4f_44;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| splitmix64(acc.rotate_left(17) ^ splitmix64(p)))
}

pub fn rng_for(master: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, path))
}
