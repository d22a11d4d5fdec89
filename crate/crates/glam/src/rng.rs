//! Seeded random streams.
//!
//! All randomness in a run flows from one master seed through named
//! sub-streams, so individual components (split generation, dropout, Gumbel
//! sampling, sweep sampling) are reproducible in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives independent, reproducible RNG streams from a master seed.
#[derive(Debug, Clone, Copy)]
pub struct SeedStreams {
    master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        SeedStreams { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// A named stream, e.g. `"dropout"` or `"gumbel"`.
    pub fn stream(&self, name: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(self.master, name, 0))
    }

    /// A named stream with an index, e.g. per-trial or per-epoch streams.
    pub fn substream(&self, name: &str, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(self.master, name, index.wrapping_add(1)))
    }
}

// FNV-1a over (name, index) folded into the master seed, then finalized with
// splitmix64 so nearby seeds do not produce correlated streams.
fn mix(master: u64, name: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^= index;
    h = h.wrapping_mul(0x0000_0100_0000_01b3);
    h ^= master;
    splitmix64(h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
