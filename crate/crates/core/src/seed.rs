//! Seed derivation.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by a 64-bit
//! seed and a purpose tag, so adding a new random field never shifts the
//! draws of an existing one. Per-trial seeds come from a counter-style mix of
//! a root seed and the trial index, which makes trial sets order independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags selecting independent ChaCha streams for one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    MatrixEntries = 1,
    RowIndices = 2,
    Generator = 3,
    Signs = 4,
    Points = 5,
    Supports = 6,
    Tail = 7,
    Vectors = 8,
}

pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of child `index` from `root`.
pub fn derive(root: u64, index: u64) -> u64 {
    mix(mix(root) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}
