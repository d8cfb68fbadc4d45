//! Deterministic random-stream derivation.
//!
//! Every stochastic stage derives its own ChaCha stream from the master seed
//! and a small tag tuple (typically generation, phase, item index). Work can
//! then be distributed over any number of threads without changing a single
//! drawn value, which keeps solver output byte-identical across `--threads`
//! settings.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives an independent random stream from the master seed and three tags.
pub fn derive_rng(seed: u64, a: u64, b: u64, c: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&a.to_le_bytes());
    key[16..24].copy_from_slice(&b.to_le_bytes());
    key[24..32].copy_from_slice(&c.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
