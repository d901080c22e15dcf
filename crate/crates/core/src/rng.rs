//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by the
//! run seed and selected by a purpose tag ("positions", "edges", "init",
//! "splits", ...). ChaCha is counter based, so streams with different tags
//! never overlap and adding draws to one stage leaves every other stage
//! bit-for-bit unchanged.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

/// FNV-1a over the tag bytes; stable across platforms and releases.
fn tag_hash(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Independent stream for `(seed, tag)`.
pub fn stream(seed: u64, tag: &str) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(tag_hash(tag));
    rng
}

/// Derive a child seed, for handing a sub-experiment its own seed space.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    // splitmix64 finaliser over the combined key
    let mut z = seed ^ tag_hash(tag).rotate_left(17);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
