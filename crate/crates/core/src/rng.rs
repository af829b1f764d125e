//! Seeded, splittable random streams.
//!
//! A stream is a `(seed, stream_id)` pair mapped onto ChaCha8 with the stream
//! id selecting one of ChaCha's 2^64 independent streams. The same pair gives
//! the same sequence on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// A child stream keyed by `label`; independent of the parent and of
    /// siblings with other labels.
    pub fn derive(&self, label: &str) -> Self {
        let mut h = Fnv1a::new();
        h.write_u64(self.stream_id);
        h.write_str(label);
        Self {
            seed: self.seed,
            stream_id: h.finish(),
        }
    }
}

/// Stable 64-bit stream id for a tuple of string keys (FNV-1a with a
/// separator byte between parts).
pub fn stream_id_for(parts: &[&str]) -> u64 {
    let mut h = Fnv1a::new();
    for p in parts {
        h.write_str(p);
    }
    h.finish()
}

struct Fnv1a(u64);

impl Fnv1a {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    fn new() -> Self {
        Self(Self::OFFSET)
    }

    fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
    }

    fn write_str(&mut self, s: &str) {
        self.write_bytes(s.as_bytes());
        self.write_bytes(&[0xff]);
    }

    fn write_u64(&mut self, v: u64) {
        self.write_bytes(&v.to_le_bytes());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}
