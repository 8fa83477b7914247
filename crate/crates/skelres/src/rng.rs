//! Seeded, platform-stable randomness.
//!
//! Everything stochastic (weight init, dropout masks, shuffling, synthetic
//! data) draws from a ChaCha8 stream so a seed fully determines a run.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngState {
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn seed_from(seed: u64) -> Self {
        RngState {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent substream; used to decouple e.g. init draws from
    /// dropout draws so adding one consumer never shifts another.
    pub fn fork(&self, stream: u64) -> Self {
        let mut rng = self.rng.clone();
        rng.set_stream(stream);
        RngState { rng }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller; two uniforms per draw, no caching,
    /// so the stream position is a pure function of the draw count.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform(); // avoid ln(0)
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.rng.gen_range(0..=i);
            items.swap(i, j);
        }
    }
}
