//! Seeded random streams.
//!
//! Every experiment derives its generators from one `u64` seed plus a stream
//! index, so per-scale or per-parameter work can run in any order (or in
//! parallel) and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every sampler and packing run.
pub type SimRng = ChaCha8Rng;

/// Generator for `seed` on stream `stream`.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent child seed; used to give nested experiments
/// disjoint stream spaces.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
