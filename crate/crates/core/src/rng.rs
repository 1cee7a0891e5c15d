//! Seeded random streams.
//!
//! Every stochastic operation draws from a ChaCha20 stream keyed by a 64-bit seed.
//! Independent replications use the stream id derived from a tag and a counter,
//! so results never depend on execution order or thread count.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit key for a `(tag, index)` pair.
pub fn stream_id(tag: &str, index: u64) -> u64 {
    // FNV-1a over the tag, then mixed with the index
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    mix(h ^ mix(index))
}

/// Generator for `seed` on its default stream.
pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Generator for replication `index` of the component named `tag`.
pub fn substream(seed: u64, tag: &str, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(tag, index));
    rng
}

/// Derived 64-bit seed for a nested seeded operation.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    mix(seed ^ stream_id(tag, index))
}

/// Uniform draw from the open interval (0, 1).
#[inline]
pub fn uniform<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}
