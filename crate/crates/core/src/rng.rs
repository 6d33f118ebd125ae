//! Splittable seeded random streams.
//!
//! Monte Carlo trials, GA runs, and channel draws each own a stream derived
//! from the master seed by a path of labels. A child stream depends only on
//! the root seed and the labels along the path, never on how much of the
//! parent has been consumed, so serial and parallel schedules produce
//! identical draws.

use rand::{Error as RandError, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random stream that can spawn independent child streams.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Root stream for a run.
    pub fn from_seed(seed: u64) -> Self {
        Self::with_key(mix(ROOT_SALT, seed))
    }

    /// Child stream identified by `label`.
    ///
    /// Deriving the same label twice yields the same stream; the parent's
    /// position is not consumed or inspected.
    pub fn derive(&self, label: u64) -> Self {
        Self::with_key(mix(self.key, label))
    }

    fn with_key(key: u64) -> Self {
        RngStream {
            key,
            rng: ChaCha8Rng::seed_from_u64(key),
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), RandError> {
        self.rng.try_fill_bytes(dest)
    }
}

const ROOT_SALT: u64 = 0x5e40_91a3_7b1e_55d1;

// SplitMix64 finalizer over the (key, label) pair.
fn mix(key: u64, label: u64) -> u64 {
    let mut z = key ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
