//! Index-parallel map with a sequential fallback.
//!
//! Results are always returned in index order, so callers that derive all
//! randomness from the index are deterministic regardless of worker count.

use std::ops::Range;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ALONLAB_THREADS";

/// Worker count: `requested` (default: all available cores), capped by
/// `ALONLAB_THREADS` when it is set to a positive integer.
pub fn worker_count(requested: Option<usize>) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut w = requested.unwrap_or(available).max(1);
    if let Some(cap) = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if cap > 0 {
            w = w.min(cap);
        }
    }
    w
}

/// `range.map(f).collect()` on up to `workers` threads.
#[cfg(feature = "parallel")]
pub fn par_map<T, F>(range: Range<u64>, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if workers <= 1 {
        return seq_map(range, f);
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| range.into_par_iter().map(&f).collect()),
        Err(_) => seq_map(range, f),
    }
}

/// `range.map(f).collect()`; built without the `parallel` feature.
#[cfg(not(feature = "parallel"))]
pub fn par_map<T, F>(range: Range<u64>, _workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    seq_map(range, f)
}

/// Sequential reference path.
pub fn seq_map<T, F>(range: Range<u64>, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    range.map(f).collect()
}
