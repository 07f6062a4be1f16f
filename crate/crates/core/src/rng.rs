//! Keyed random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator whose
//! 256-bit seed is the SHA-256 digest of a root seed followed by a list of
//! labels (strings and integers). Two streams share state only if their full
//! label paths are equal, so work items can be scheduled in any order or on
//! any number of threads without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

#[derive(Clone)]
pub struct StreamKey {
    hasher: Sha256,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"corrscreen/stream/v1");
        hasher.update(seed.to_le_bytes());
        StreamKey { hasher }
    }

    pub fn label(mut self, label: &str) -> Self {
        self.hasher.update([0x01]);
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self
    }

    pub fn index(mut self, value: u64) -> Self {
        self.hasher.update([0x02]);
        self.hasher.update(value.to_le_bytes());
        self
    }

    /// Keys a real parameter by its exact bit pattern.
    pub fn real(self, value: f64) -> Self {
        self.index(value.to_bits())
    }

    /// Keys an unordered pair of names; `(a, b)` and `(b, a)` give the same stream.
    pub fn unordered_pair(self, a: &str, b: &str) -> Self {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.label(lo).label(hi)
    }

    fn digest(self) -> [u8; 32] {
        let out = self.hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&out);
        seed
    }

    pub fn rng(self) -> StreamRng {
        ChaCha8Rng::from_seed(self.digest())
    }

    /// Derives a plain 64-bit seed, for APIs that take one.
    pub fn seed(self) -> u64 {
        let d = self.digest();
        u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
    }
}
