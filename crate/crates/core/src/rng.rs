//! Per-sample random streams. Each sample draws from its own generator keyed
//! by `(seed, stream, index)`, so parallel drivers give identical results for
//! any scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn sample_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let k = splitmix(splitmix(splitmix(seed) ^ stream) ^ index);
    ChaCha8Rng::seed_from_u64(k)
}
