//! Order-preserving parallel map over work units.
//!
//! Results always come back in unit order, so any fold over them is
//! independent of the number of worker threads.

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
pub fn map_units<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
        {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a pool of {workers} workers ({e}); using the global pool");
                f()
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}

/// Splits `n` items into fixed-size chunks: `(chunk index, len)` pairs.
///
/// Chunk boundaries depend only on `n` and `chunk`, never on the worker count.
pub fn chunks(n: u64, chunk: u64) -> Vec<(u64, u64)> {
    let chunk = chunk.max(1);
    let count = n.div_ceil(chunk);
    (0..count)
        .map(|i| (i, chunk.min(n - i * chunk)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_exactly() {
        let c = chunks(10_001, 4096);
        assert_eq!(c, vec![(0, 4096), (1, 4096), (2, 1809)]);
        assert!(chunks(0, 10).is_empty());
    }

    #[test]
    fn map_preserves_order_under_any_pool() {
        for w in [1, 3, 8] {
            let v = with_workers(w, || map_units(100, |i| i * i));
            assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }
}
