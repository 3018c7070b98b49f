//! Order-preserving map helpers. With the `parallel` feature the work is
//! spread over the rayon pool; without it the same closures run in a plain
//! loop. Results come back in input order either way, so every reduction
//! performed on them is independent of scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map_vec<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Splits `0..total` into at most `chunks` contiguous ranges.
pub(crate) fn chunk_ranges(total: u64, chunks: u64) -> Vec<std::ops::Range<u64>> {
    let chunks = chunks.clamp(1, total.max(1));
    let step = total.div_ceil(chunks);
    (0..chunks)
        .map(|c| (c * step).min(total)..((c + 1) * step).min(total))
        .filter(|r| !r.is_empty())
        .collect()
}

pub(crate) fn default_chunks() -> u64 {
    #[cfg(feature = "parallel")]
    {
        (rayon::current_num_threads() as u64 * 4).max(1)
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
