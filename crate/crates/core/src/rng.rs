//! Seeded random streams.
//!
//! Every consumer of randomness draws from a ChaCha8 stream keyed by
//! `(master seed, domain, index)`, so results do not depend on evaluation
//! order or on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Randomness domains. Distinct domains never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    BaseSequence = 1,
    FinalPulse = 2,
    PauliFrame = 3,
    Noise = 4,
    Shots = 5,
    Tomography = 6,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(b"sagqg-rb");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
