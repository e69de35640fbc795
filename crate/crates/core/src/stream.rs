//! Deterministic randomness streams.
//!
//! Every random draw in the crate comes from a [`Stream`] derived from a
//! 64-bit master seed and a list of integer labels (rep, policy, round, arm,
//! ...). Derivation hashes the seed and the length-prefixed labels with
//! SHA-256 and uses the digest as a ChaCha8 key, so distinct label paths give
//! independent streams and identical paths give identical streams on every
//! platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

const DOMAIN: &[u8] = b"rmm-bandit/stream/v1";

pub fn derive_stream(master_seed: u64, labels: &[u64]) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(DOMAIN);
    hasher.update(master_seed.to_le_bytes());
    hasher.update((labels.len() as u64).to_le_bytes());
    for label in labels {
        hasher.update(label.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}
