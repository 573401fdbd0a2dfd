//! Counter-based randomness.
//!
//! Every random draw in the automaton is a pure function of a small tuple of
//! counters (master seed, stream, row, column). There is no generator state to
//! thread through the stepping kernel, so rows can be processed in any order
//! or in parallel and still produce bit-identical grids.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes an ordered list of words into one 64-bit value.
#[inline]
pub fn hash_words(words: &[u64]) -> u64 {
    let mut h = GOLDEN;
    for &w in words {
        h = mix64(h.wrapping_add(GOLDEN) ^ mix64(w.wrapping_add(GOLDEN)));
    }
    h
}

/// Maps a 64-bit value to a uniform double in `[0, 1)` using the top 53 bits.
#[inline(always)]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[0, 1)` for one lattice cell.
#[inline]
pub fn cell_uniform(seed: u64, stream: u64, row: usize, col: usize) -> f64 {
    unit_f64(hash_words(&[seed, stream, row as u64, col as u64]))
}

/// Derives an independent child seed, e.g. one per replicate.
pub fn sub_seed(master: u64, tag: u64, index: u64) -> u64 {
    hash_words(&[master, tag, index])
}
