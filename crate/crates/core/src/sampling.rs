//! Seeded sampling shared by the mixer and the challenge builders.
//!
//! All draws come from a ChaCha8 stream and are made on `u64`, so results are
//! identical across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform index in `0..len`. `len` must be positive.
pub fn pick(rng: &mut SeededRng, len: usize) -> usize {
    rng.gen_range(0..len as u64) as usize
}

/// First `n` positions of a forward Fisher-Yates shuffle of `0..len`, in
/// draw order. Prefixes are stable: the draw for `n` is a prefix of the
/// draw for any larger `n` with the same stream.
pub fn shuffled_prefix(rng: &mut SeededRng, len: usize, n: usize) -> Vec<usize> {
    let n = n.min(len);
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..n {
        let j = i + pick(rng, len - i);
        idx.swap(i, j);
    }
    idx.truncate(n);
    idx
}

/// Uniform `n`-subset of `0..len`, sorted ascending.
pub fn sample_indices(rng: &mut SeededRng, len: usize, n: usize) -> Vec<usize> {
    let mut idx = shuffled_prefix(rng, len, n);
    idx.sort_unstable();
    idx
}
