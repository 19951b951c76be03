//! Seeded random streams.
//!
//! Every replication gets its own ChaCha stream selected by `(seed, index)`,
//! so results never depend on which thread ran which replication.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// The stream for replication `index` under master seed `seed`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A second, disjoint family of streams under the same seed, for auxiliary
/// draws that must not perturb the main replications (source choice in trace
/// replay, trial streams in measurements, ...).
pub fn substream(seed: u64, family: u64, index: u64) -> SimRng {
    let mixed = seed ^ family.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    stream(mixed, index)
}
