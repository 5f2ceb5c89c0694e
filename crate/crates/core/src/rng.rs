//! Per-path random streams.
//!
//! Every simulated path draws from its own ChaCha8 stream selected by
//! `(seed, path index)`. ChaCha is counter based, so stream `i` is the same
//! sequence no matter which thread runs it or in what order paths are
//! scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStreams {
    seed: u64,
}

impl PathStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for path `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// Uniform variate on the open interval `(0, 1)`.
pub fn open01(rng: &mut dyn RngCore) -> f64 {
    // 53 random bits centred in their cell never hit 0 or 1.
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
