//! Seeded random substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by the
//! user seed, with the ChaCha stream id selecting an independent substream.
//! A trial's randomness therefore depends only on `(seed, stream)` and not on
//! how trials are batched or scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `trial` of the sweep point labelled `point`.
///
/// The 64-bit id packs the point label in the high 24 bits and the trial
/// index in the low 40 bits.
pub fn trial_stream(point: u64, trial: u64) -> u64 {
    debug_assert!(point < (1 << 24) && trial < (1 << 40));
    (point << 40) | trial
}
