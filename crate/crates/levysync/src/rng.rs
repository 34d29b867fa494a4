//! Reproducible random streams.
//!
//! A replica's key is built from `(base_seed, replica)`; the clock, Levy,
//! routing and initial-state draws use separate ChaCha streams under that
//! key, so no stream's consumption can shift another's.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Clock = 1,
    Levy = 2,
    Routing = 3,
    Initial = 4,
}

pub fn stream(base_seed: u64, replica: u64, which: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&base_seed.to_le_bytes());
    key[8..16].copy_from_slice(&replica.to_le_bytes());
    key[16..24].copy_from_slice(b"levysync");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(which as u64);
    rng
}

/// The four streams one replica owns.
pub struct ReplicaRng {
    pub clock: ChaCha8Rng,
    pub levy: ChaCha8Rng,
    pub routing: ChaCha8Rng,
    pub initial: ChaCha8Rng,
}

impl ReplicaRng {
    pub fn new(base_seed: u64, replica: u64) -> Self {
        Self {
            clock: stream(base_seed, replica, Stream::Clock),
            levy: stream(base_seed, replica, Stream::Levy),
            routing: stream(base_seed, replica, Stream::Routing),
            initial: stream(base_seed, replica, Stream::Initial),
        }
    }
}
