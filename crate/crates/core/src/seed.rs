//! Deterministic seeding.
//!
//! Every random Ising instance is drawn from its own ChaCha8 stream (a
//! counter-based generator). Instance `k` of an ensemble with master seed `s`
//! uses the sub-seed
//!
//! ```text
//! instance_seed(s, k) = splitmix64(s ^ splitmix64(k + 1))
//! ```
//!
//! so a record can be replayed from `(s, k)` alone, independently of how the
//! ensemble was scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `x + γ`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed of instance `index` under `master`.
pub fn instance_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

pub fn coupling_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
