//! Seed derivation.
//!
//! Every experiment starts from one 64-bit master seed. A trial seed is
//! derived from `(master, point, trial)` with SplitMix64, and each random
//! object inside a trial draws from its own ChaCha8 stream selected by a
//! fixed [`Stream`] tag. The order in which objects are synthesized therefore
//! never changes their contents, and parallel trials never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One SplitMix64 output step applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at sweep point `point`.
pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    splitmix64(master ^ splitmix64(splitmix64(point) ^ trial.rotate_left(32)))
}

/// Stream tags; the discriminant is the ChaCha stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Database = 1,
    Pattern = 2,
    Permutation = 3,
    Channel = 4,
    SeedRows = 5,
    SeedChannel = 6,
}

/// Source of independent per-object generators for one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn for_trial(master: u64, point: u64, trial: u64) -> Self {
        Self::new(trial_seed(master, point, trial))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream as u64);
        rng
    }
}
