//! Seeded random streams.
//!
//! All stochastic routines draw from ChaCha8 keyed by the user seed. Each unit
//! of work (a sampling pass, or one object in a random process) reads its own
//! stream, selected by a counter: `stream = (tag << 40) | index`. Output is
//! therefore a pure function of (inputs, seed) and does not depend on
//! scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent substream `index` within the family `tag` for `seed`.
pub fn substream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 40) | (index & ((1 << 40) - 1)));
    rng
}

/// Draws an index with probability proportional to `weights` (all ≥ 0, not
/// all zero).
pub fn draw_weighted<R: Rng>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // rounding at the upper end
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}
