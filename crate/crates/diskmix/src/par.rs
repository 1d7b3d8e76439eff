//! Parallel loop helpers with a sequential fallback.
//!
//! Data-parallel sections of the crate go through these entry points. With
//! the default `parallel` feature they dispatch to rayon; without it they
//! compile to plain iterators. [`run_sequential`] additionally forces the
//! sequential lane at runtime so benchmarks can compare both in one binary.
//!
//! Reductions are structured map-collect-then-fold, so results are
//! byte-identical regardless of thread count or scheduling.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQ: AtomicBool = AtomicBool::new(false);

/// Runs `f` with all [`par`](self) helpers forced onto the sequential lane.
///
/// The flag is process-global: concurrent callers on other threads fall back
/// to sequential execution while `f` runs, which affects speed, never
/// results.
pub fn run_sequential<R>(f: impl FnOnce() -> R) -> R {
    FORCE_SEQ.store(true, Ordering::SeqCst);
    let out = f();
    FORCE_SEQ.store(false, Ordering::SeqCst);
    out
}

/// True when calls will actually run on rayon.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQ.load(Ordering::Relaxed)
}

/// Configures the global thread pool size. `None` leaves the default.
/// Calling more than once is harmless (later calls are ignored by rayon).
#[cfg(feature = "parallel")]
pub fn init_threads(n: Option<usize>) {
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn init_threads(_n: Option<usize>) {}

/// `(0..len).map(f)` collected into a vector, in index order.
pub fn map_indexed<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !FORCE_SEQ.load(Ordering::Relaxed) {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

/// Applies `f` to consecutive chunks of `data` (the last may be short),
/// passing the chunk index.
pub fn for_each_chunk<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    assert!(chunk_len > 0);
    #[cfg(feature = "parallel")]
    if !FORCE_SEQ.load(Ordering::Relaxed) {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    for (i, c) in data.chunks_mut(chunk_len).enumerate() {
        f(i, c);
    }
}

/// Maximum of `|v|` over a slice; 0 for an empty slice. NaN-free input
/// assumed (all producers in this crate assert finiteness).
pub fn max_abs(values: &[f64]) -> f64 {
    const CHUNK: usize = 8192;
    let n_chunks = values.len().div_ceil(CHUNK);
    let partials = map_indexed(n_chunks, |i| {
        values[i * CHUNK..((i + 1) * CHUNK).min(values.len())]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    });
    partials.into_iter().fold(0.0, f64::max)
}

/// Sum of per-index contributions, accumulated in index order.
pub fn sum_indexed<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(len, f).into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let v = map_indexed(1000, |i| i * i);
        assert_eq!(v[7], 49);
        assert_eq!(v.len(), 1000);
    }

    #[test]
    fn sequential_lane_matches() {
        let a = map_indexed(257, |i| (i as f64).sin());
        let b = run_sequential(|| map_indexed(257, |i| (i as f64).sin()));
        assert_eq!(a, b);
    }

    #[test]
    fn max_abs_small_and_empty() {
        assert_eq!(max_abs(&[]), 0.0);
        assert_eq!(max_abs(&[-3.0, 2.0]), 3.0);
    }

    #[test]
    fn chunked_write_covers_all() {
        let mut data = vec![0usize; 100];
        for_each_chunk(&mut data, 7, |i, c| {
            for (k, x) in c.iter_mut().enumerate() {
                *x = i * 7 + k;
            }
        });
        assert!(data.iter().enumerate().all(|(i, &x)| x == i));
    }
}
