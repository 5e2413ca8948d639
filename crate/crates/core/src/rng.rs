//! Seeded generators and the child-seed derivation rule.
//!
//! Every random stage owns a [`ChaCha8Rng`] seeded from a `u64`. Parallel or
//! repeated stages never share a generator; each gets
//! `derive_seed(parent, tag, index)`, a SplitMix64 mix of the three inputs, so
//! results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Stream tags used with [`derive_seed`].
pub mod tag {
    pub const BICRITERIA_RUN: u64 = 0x01;
    pub const SAMPLE: u64 = 0x02;
    pub const LEAF: u64 = 0x03;
    pub const COMPRESS: u64 = 0x04;
    pub const WORKER: u64 = 0x05;
    pub const REBUILD: u64 = 0x06;
    pub const RESTART: u64 = 0x07;
    pub const SUITE: u64 = 0x08;
    pub const GENERATOR: u64 = 0x09;
    pub const FINALIZE: u64 = 0x0a;
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for the `index`-th use of stream `tag` under `parent`.
pub fn derive_seed(parent: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(parent) ^ tag) ^ index)
}
