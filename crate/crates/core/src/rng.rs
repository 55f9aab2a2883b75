//! Counter-addressed random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream selected by
//! `(seed, tag, index)`: the tag picks the ChaCha stream id and the index
//! picks a disjoint window of the keystream. Work items (a matrix row, a Monte
//! Carlo chunk, an annealing restart) own their window, so results do not
//! depend on how work is scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Keystream words reserved per index (2^36 words, far beyond any single work item).
const WINDOW_BITS: u32 = 36;

pub mod tag {
    pub const LATENTS: u64 = 1;
    pub const PAIRS: u64 = 2;
    pub const LABELS: u64 = 3;
    pub const MONTE_CARLO: u64 = 4;
    pub const CUT_HEURISTIC: u64 = 5;
    pub const ANNEAL: u64 = 6;
    pub const DERIVE: u64 = 7;
    pub const SUBSAMPLE: u64 = 8;
    pub const ATTACHMENT: u64 = 9;
    pub const MARKOV: u64 = 10;
}

/// Stream for work item `index` under `tag`.
pub fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng.set_word_pos((index as u128) << WINDOW_BITS);
    rng
}

/// Child seed for a tuple of coordinates, e.g. `(n, replication)`.
pub fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(seed, |s, &c| stream(s, tag::DERIVE, c).next_u64())
}

/// Uniform in `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
