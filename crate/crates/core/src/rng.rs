//! Seeded random streams.
//!
//! Every stochastic stage draws from a stream derived from the master seed,
//! a stage name and a task key. Because a stream depends only on those three
//! values, results do not depend on how tasks are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The random generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

fn digest(seed: u64, stage: &str, key: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((stage.len() as u64).to_le_bytes());
    hasher.update(stage.as_bytes());
    hasher.update((key.len() as u64).to_le_bytes());
    hasher.update(key.as_bytes());
    let out = hasher.finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&out);
    bytes
}

/// Stream for task `key` of stage `stage` under master seed `seed`.
pub fn substream(seed: u64, stage: &str, key: &str) -> SimRng {
    SimRng::from_seed(digest(seed, stage, key))
}

/// A child master seed, for stages that hand a seed on to further stages.
pub fn derive_seed(seed: u64, stage: &str, key: &str) -> u64 {
    let bytes = digest(seed, stage, key);
    u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"))
}

/// Plain seeded stream, for callers that only need one.
pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
