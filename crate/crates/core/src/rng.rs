//! Counter-based seed derivation.
//!
//! Every random stream in a run descends from one master seed through a path
//! of tags, e.g. `master / trial 17 / M 32 / "direct"`. A child seed is
//! `splitmix64(parent ^ splitmix64(tag))`, where string tags are first folded
//! with FNV-1a. Streams therefore depend only on their path, never on the
//! order in which trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream(u64);

impl SeedStream {
    pub const fn new(master: u64) -> Self {
        Self(master)
    }

    pub fn seed(&self) -> u64 {
        self.0
    }

    pub fn child(&self, tag: u64) -> Self {
        Self(splitmix64(self.0 ^ splitmix64(tag)))
    }

    pub fn named(&self, tag: &str) -> Self {
        self.child(fnv1a(tag.as_bytes()))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}
