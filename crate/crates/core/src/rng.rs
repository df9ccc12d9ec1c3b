//! Counter-based random streams.
//!
//! A stream is identified by `(key, stream)`: the key seeds a ChaCha8
//! generator and the stream index selects one of its 2^64 independent
//! sequences. Keys for nested experiments are derived from a master seed
//! with [`derive`], so trial `t` always sees the same numbers no matter which
//! worker runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep derived keys for different purposes apart.
pub mod tag {
    pub const TRIAL: u64 = 0x7472_6961_6c00_0001;
    pub const SELECT: u64 = 0x7365_6c65_6374_0002;
    pub const RESTART: u64 = 0x7265_7374_6172_0003;
    pub const NULL: u64 = 0x6e75_6c6c_0000_0004;
    pub const FRESH: u64 = 0x6672_6573_6800_0005;
    pub const GAUSS: u64 = 0x6761_7573_7300_0006;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child key from `seed` for the given purpose and index.
pub fn derive(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ tag).wrapping_add(splitmix64(index)))
}

/// Returns stream `stream` of the generator keyed by `key`.
pub fn stream(key: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream);
    rng
}
