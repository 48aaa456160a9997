//! Counter-based random streams: every stream is a pure function of a seed
//! and a list of integer keys, so parallel runs do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for the stream identified by `keys` under `seed`.
pub fn stream_rng(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let mut state = mix(seed.wrapping_add(GOLDEN));
    for (i, &k) in keys.iter().enumerate() {
        state = mix(state ^ mix(k.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN))));
    }
    let mut bytes = [0u8; 32];
    for (i, chunk) in bytes.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&mix(state.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN))).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Seed and stream index a path was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub stream: u64,
}
