//! Per-trajectory, per-mode Gaussian streams.
//!
//! Each `(trajectory, mode)` pair owns a ChaCha8 keystream: the master seed
//! selects the key, the trajectory index the stream id, and the mode an offset
//! of `2^40` words inside the stream. Draws therefore depend only on
//! `(seed, trajectory, mode, step)`, not on scheduling, and mode `j` sees the
//! same noise whatever the Galerkin level.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const MODE_STRIDE: u128 = 1 << 40;

#[derive(Debug, Clone)]
pub struct NoiseSource {
    streams: Vec<ChaCha8Rng>,
}

impl NoiseSource {
    pub fn new(seed: u64, trajectory: u64, modes: usize) -> Self {
        let base = ChaCha8Rng::seed_from_u64(seed);
        let streams = (0..modes)
            .map(|j| {
                let mut rng = base.clone();
                rng.set_stream(trajectory);
                rng.set_word_pos(j as u128 * MODE_STRIDE);
                rng
            })
            .collect();
        Self { streams }
    }

    /// Re-targets the streams at another trajectory without reallocating.
    pub fn reset(&mut self, trajectory: u64) {
        for (j, rng) in self.streams.iter_mut().enumerate() {
            rng.set_stream(trajectory);
            rng.set_word_pos(j as u128 * MODE_STRIDE);
        }
    }

    pub fn modes(&self) -> usize {
        self.streams.len()
    }

    /// Fills `w` with one standard normal per mode.
    #[inline]
    pub fn fill(&mut self, w: &mut [f64]) {
        for (x, rng) in w.iter_mut().zip(self.streams.iter_mut()) {
            *x = StandardNormal.sample(rng);
        }
    }
}
