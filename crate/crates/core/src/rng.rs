//! Named, independent random streams derived from a single 64-bit seed.
//!
//! Every consumer of randomness draws from its own ChaCha stream, so adding or
//! reordering consumers never changes what another consumer sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers. The five channel links come first, in the order
/// `ab, ar, rb, ae, re`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    LinkAb,
    LinkAr,
    LinkRb,
    LinkAe,
    LinkRe,
    InitTheta,
    InitPrecoder,
    RandomRisTheta,
    RandomPrecoder,
    /// Free-form stream for test batteries and sweeps.
    Other(u32),
}

impl Purpose {
    pub fn stream_id(self) -> u64 {
        match self {
            Purpose::LinkAb => 0,
            Purpose::LinkAr => 1,
            Purpose::LinkRb => 2,
            Purpose::LinkAe => 3,
            Purpose::LinkRe => 4,
            Purpose::InitTheta => 16,
            Purpose::InitPrecoder => 17,
            Purpose::RandomRisTheta => 18,
            Purpose::RandomPrecoder => 19,
            Purpose::Other(k) => 1024 + k as u64,
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `index`-th trial under a master seed.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub fn stream(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose.stream_id());
    rng
}
