//! Deterministic generator sub-streams.
//!
//! Every stochastic component draws from a ChaCha stream keyed by the run
//! seed plus a tag path (purpose, epoch, layer, node). Streams never share
//! state, so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream purposes. Values are part of the reproducibility contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    DfsPath = 2,
    Dpp = 3,
    RandomNegatives = 4,
    Dropout = 5,
    Sbm = 6,
    Check = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: Stream, tags: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(stream as u64));
    for &t in tags {
        h = splitmix64(h ^ t.wrapping_mul(0x2545_f491_4f6c_dd1d));
    }
    h
}

pub fn stream(seed: u64, stream: Stream, tags: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, stream, tags))
}
