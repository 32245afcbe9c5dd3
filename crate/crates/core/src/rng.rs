//! Seed derivation. Every random decision in the simulator draws from a
//! ChaCha stream keyed by `(base seed, purpose, index)`, so results never
//! depend on call order across subsystems.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const TOPOLOGY: u64 = 0x01;
pub const STATIONS: u64 = 0x02;
pub const SYNTHETIC: u64 = 0x03;
pub const INIT: u64 = 0x04;
pub const TRAIN: u64 = 0x05;
pub const PARTICIPATION: u64 = 0x06;
pub const LOUVAIN: u64 = 0x07;
pub const SCHEDULE: u64 = 0x08;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn derive_seed(base: u64, purpose: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ purpose) ^ index)
}

pub fn rng_for(base: u64, purpose: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(base, purpose, index))
}
