//! Execution helpers: data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) [`map`] runs on the rayon thread
//! pool; without it, the same call degrades to a plain sequential loop.
//! [`map_serial`] is always sequential and exists so benchmarks can compare
//! both paths inside one build.
//!
//! Every result vector preserves input order, so callers see identical
//! output regardless of thread count. Reductions that are sensitive to
//! float summation order must fold the returned chunks sequentially
//! (see [`map_chunks`]), never tree-reduce.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map over a slice, parallel when the feature allows.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential twin of [`map`]; benchmarks compare against this.
pub fn map_serial<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Map over fixed-size chunks of a slice, preserving chunk order.
///
/// Chunk boundaries depend only on `chunk`, never on thread count, so a
/// sequential fold over the result is deterministic.
pub fn map_chunks<T, U, F>(items: &[T], chunk: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&[T]) -> U + Sync + Send,
{
    assert!(chunk > 0, "chunk size must be positive");
    #[cfg(feature = "parallel")]
    {
        items.par_chunks(chunk).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.chunks(chunk).map(f).collect()
    }
}

/// Parallel map over indices `0..n`, order-preserving.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let doubled = map(&xs, |x| x * 2);
        assert_eq!(doubled, map_serial(&xs, |x| x * 2));
    }

    #[test]
    fn chunked_fold_matches_serial_sum() {
        let xs: Vec<f64> = (0..997).map(|i| (i as f64) * 0.001).collect();
        let serial: f64 = xs.iter().sum();
        let partials = map_chunks(&xs, 64, |c| c.iter().sum::<f64>());
        let chunked: f64 = partials.iter().sum();
        assert!((serial - chunked).abs() < 1e-9);
    }
}
