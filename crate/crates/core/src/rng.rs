//! Seeded, splittable randomness. Every consumer derives its own ChaCha
//! stream from the run seed, so adding a draw in one place never shifts
//! the numbers seen elsewhere.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::C64;

#[derive(Debug, Clone)]
pub struct SplitRng {
    inner: ChaCha8Rng,
}

impl SplitRng {
    pub fn new(seed: u64) -> Self {
        SplitRng { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent generator for the named sub-stream of `seed`.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SplitRng { inner }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform in the complex unit square `[0,1) + i[0,1)`.
    pub fn unit_square(&mut self) -> C64 {
        let re = self.uniform();
        C64::new(re, self.uniform())
    }
}
