//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by
//! `SHA-256("cat0ot" || seed as 8 little-endian bytes || tag)`, so any
//! implementation of ChaCha8 can reproduce the samples from `(seed, tag)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub use rand_chacha::ChaCha8Rng as StreamRng;

pub fn stream(seed: u64, tag: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"cat0ot");
    hasher.update(seed.to_le_bytes());
    hasher.update(tag.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(key)
}
