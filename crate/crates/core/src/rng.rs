//! Seeded randomness.
//!
//! Every randomized routine takes a single `u64` seed. Independent consumers
//! derive their generator from that seed plus a fixed stream id, so adding a
//! consumer never perturbs the draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    RandomMatrix = 1,
    Jacobian = 2,
    Subspace = 3,
    Completion = 4,
    Census = 5,
    Sampling = 6,
}

pub fn stream(seed: u64, id: Stream) -> ChaCha20Rng {
    substream(seed, id, 0)
}

/// Stream `id`, sub-index `k` (trial number, sample number, ...).
pub fn substream(seed: u64, id: Stream, k: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(id as u64);
    rng
}
