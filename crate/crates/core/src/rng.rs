use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator used by every simulator.
pub type SimRng = ChaCha8Rng;

/// Identifies one replicate's random stream: a master seed plus the
/// replicate index. Equal streams reproduce equal trajectories bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// A distinct stream for a second model run on the same replicate. Leave
    /// the stream untouched to couple models through common noise.
    pub fn derive(self, salt: u64) -> Self {
        Self {
            seed: mix(self.seed ^ mix(salt.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream: self.stream,
        }
    }

    /// Replicate seed `hash(master, index)`.
    pub fn replicate_seed(&self) -> u64 {
        mix(self.seed ^ mix(self.stream.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1)))
    }

    pub fn rng(&self) -> SimRng {
        ChaCha8Rng::seed_from_u64(self.replicate_seed())
    }
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_stream_same_numbers() {
        let a: Vec<u64> = RngStream::new(7, 3).rng().random_iter().take(8).collect();
        let b: Vec<u64> = RngStream::new(7, 3).rng().random_iter().take(8).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn neighbouring_streams_differ() {
        let seeds: std::collections::HashSet<u64> =
            (0..10_000).map(|i| RngStream::new(42, i).replicate_seed()).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(RngStream::new(1, 0).replicate_seed(), RngStream::new(0, 1).replicate_seed());
        assert_ne!(RngStream::new(1, 0).derive(1), RngStream::new(1, 0));
    }
}
