//! Seeded randomness.
//!
//! Every random draw in the crate comes from a [`LfRng`], which is ChaCha8
//! seeded through [`RandomSeed`]. Independent streams (per trial, per corpus
//! position, per document) are obtained with [`RandomSeed::derive`], a
//! SplitMix64 mix of the parent seed and the child index. Work partitioned
//! this way produces the same results regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator used throughout the crate.
pub type LfRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub fn rng(self) -> LfRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Child seed for the `index`-th independent sub-stream.
    pub fn derive(self, index: u64) -> RandomSeed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RandomSeed(z ^ (z >> 31))
    }
}

impl From<u64> for RandomSeed {
    fn from(v: u64) -> Self {
        RandomSeed(v)
    }
}
