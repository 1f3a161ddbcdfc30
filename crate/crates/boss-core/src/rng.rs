//! Deterministic random-stream derivation.
//!
//! Every run is driven by a single `u64` seed. Independent streams are split
//! off by hashing the seed together with a string label,
//! `key = SHA-256(seed_le_bytes || label_bytes)`, and using the 32-byte digest
//! as a ChaCha8 key. Labels used in this crate:
//!
//! * `"env"` — task-schedule generation,
//! * `"rewards"` — observation noise,
//! * `"algo"` — learner-internal randomness (expert draws, exploration coins),
//! * `"experts"` — expert-set construction,
//! * `"rep/<r>"` — repetition `r` of a base seed (see [`stream_seed`]).
//!
//! Reward noise is derived independently of the algorithm identity, so all
//! algorithms run against common random numbers for a given seed. The scheme
//! is reproducible within this implementation; it makes no claim of matching
//! other generators bit for bit.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use sha2::{Digest, Sha256};

fn derive_key(seed: u64, label: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    key
}

/// A generator for the stream identified by `(seed, label)`.
pub fn stream_rng(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_key(seed, label))
}

/// A derived `u64` seed for the stream identified by `(seed, label)`.
pub fn stream_seed(seed: u64, label: &str) -> u64 {
    let key = derive_key(seed, label);
    u64::from_le_bytes(key[..8].try_into().expect("8 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_inputs_same_stream() {
        let mut a = stream_rng(42, "rewards");
        let mut b = stream_rng(42, "rewards");
        for _ in 0..16 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }

    #[test]
    fn labels_split_streams() {
        let mut a = stream_rng(42, "rewards");
        let mut b = stream_rng(42, "algo");
        let xs: Vec<u64> = (0..8).map(|_| a.random()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.random()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn derived_seeds_distinct_across_labels_and_seeds() {
        assert_ne!(stream_seed(1, "rep/0"), stream_seed(1, "rep/1"));
        assert_ne!(stream_seed(1, "rep/0"), stream_seed(2, "rep/0"));
    }
}
