//! Seeded random streams.
//!
//! Every consumer derives its own ChaCha stream from `(seed, stream id)`, so
//! results never depend on the order in which parallel work is scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream ids for distinct consumers of one master seed.
pub(crate) mod stream {
    pub const FOREST_TREE: u64 = 1 << 32;
    pub const FOREST_IMPORTANCE: u64 = 2 << 32;
    pub const BOOST_STAGE: u64 = 3 << 32;
    pub const KFOLD: u64 = 4 << 32;
    pub const PRUNE_CV: u64 = 5 << 32;
    pub const SIMGEN: u64 = 6 << 32;
}

/// A generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// In-place Fisher–Yates shuffle.
pub fn shuffle<T, R: Rng>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Sample `k` distinct indices from `0..n`, returned in ascending order.
pub fn sample_without_replacement<R: Rng>(rng: &mut R, n: usize, k: usize) -> alloc::vec::Vec<usize> {
    let k = k.min(n);
    let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool.sort_unstable();
    pool
}

/// Shuffle `0..n` and cut it into `k` contiguous chunks whose sizes differ by
/// at most one. Each fold's indices are returned in ascending order.
pub fn balanced_folds<R: Rng>(rng: &mut R, n: usize, k: usize) -> alloc::vec::Vec<alloc::vec::Vec<usize>> {
    let mut perm: alloc::vec::Vec<usize> = (0..n).collect();
    shuffle(rng, &mut perm);
    (0..k)
        .map(|f| {
            let mut fold = perm[f * n / k..(f + 1) * n / k].to_vec();
            fold.sort_unstable();
            fold
        })
        .collect()
}
