//! Reproducible stream-splitting for the randomized modules.
//!
//! Work is divided into fixed-size chunks, and chunk `i` draws from an
//! independent ChaCha8 substream selected by `set_stream(i)` on top of the
//! user seed. Results are merged with associative, commutative reductions
//! (sums of counters, index-ordered concatenation), so sequential and
//! parallel execution — and any thread schedule — produce bit-identical
//! output for the same `(seed, n)`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for chunk `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `total` items into chunks of at most `chunk_size`, yielding
/// `(stream_index, items_in_chunk)`.
pub fn chunks(total: u64, chunk_size: u64) -> impl Iterator<Item = (u64, u64)> {
    debug_assert!(chunk_size > 0);
    let full = total / chunk_size;
    let rest = total % chunk_size;
    (0..full)
        .map(move |i| (i, chunk_size))
        .chain((rest > 0).then_some((full, rest)))
}

/// Maps `f` over the chunk list and sums the results. Uses rayon when the
/// `parallel` feature is on and `parallel` is true; the sum is associative
/// and commutative, so both paths agree exactly.
pub fn sum_chunks<T, F>(total: u64, chunk_size: u64, parallel: bool, f: F) -> T
where
    T: Send + std::iter::Sum<T>,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        let work: Vec<(u64, u64)> = chunks(total, chunk_size).collect();
        return work.into_par_iter().map(|(i, n)| f(i, n)).sum();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    chunks(total, chunk_size).map(|(i, n)| f(i, n)).sum()
}

/// Maps `f` over the chunk list and concatenates the produced vectors in
/// stream order.
pub fn collect_chunks<T, F>(total: u64, chunk_size: u64, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> Vec<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        let work: Vec<(u64, u64)> = chunks(total, chunk_size).collect();
        let parts: Vec<Vec<T>> = work.into_par_iter().map(|(i, n)| f(i, n)).collect();
        return parts.into_iter().flatten().collect();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    chunks(total, chunk_size)
        .flat_map(|(i, n)| f(i, n))
        .collect()
}
