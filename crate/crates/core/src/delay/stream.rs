use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purpose of a random stream; different tags give independent streams for
/// the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamTag {
    Delay = 1,
    Coordinate = 2,
    Component = 3,
    Data = 4,
}

/// Random values addressed by (seed, tag, k): any k can be drawn in any order
/// and always yields the same value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterStream {
    key: [u8; 32],
}

impl CounterStream {
    pub fn new(seed: u64, tag: StreamTag) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(tag as u64).to_le_bytes());
        Self { key }
    }

    /// Generator positioned at the start of stream k.
    pub fn rng_at(&self, k: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(k);
        rng
    }

    /// Uniform index in 0..n for counter k.
    pub fn index(&self, k: u64, n: usize) -> usize {
        self.rng_at(k).random_range(0..n)
    }

    /// Uniform value in [0, 1) for counter k.
    pub fn unit(&self, k: u64) -> f64 {
        self.rng_at(k).random()
    }
}
