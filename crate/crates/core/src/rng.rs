//! Seeded random streams.
//!
//! A run derives independent ChaCha streams from one seed so that adding a
//! channel or a grid point never perturbs the randomness of another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream identifiers used inside one run.
pub mod streams {
    pub const INPUT: u64 = 1;
    pub const LEARNING: u64 = 2;
    pub const RATES: u64 = 3;
    pub const WEIGHTS: u64 = 4;
    pub const IMAGES: u64 = 5;
    pub const ENUMERATION: u64 = 6;
    /// Per-channel input streams start here.
    pub const CHANNEL_BASE: u64 = 1 << 32;
}

pub fn stream(seed: u64, id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Exponential waiting time by inverse-CDF sampling.
pub fn exponential(rng: &mut impl Rng, rate: f64) -> f64 {
    // random::<f64>() is in [0, 1), so 1 - u is in (0, 1].
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Categorical draw by inverse-CDF over (not necessarily normalized) weights.
pub fn categorical(rng: &mut impl Rng, weights: &[f64], total: f64) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    // Rounding can leave target marginally above the accumulated sum.
    last_positive
}
