//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the hot per-frame and per-sample
//! loops run on rayon; without it they run sequentially. Both paths produce
//! results in index order, so outputs are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Fill `buf` (a whole number of `width`-sized rows) by calling
/// `f(row_index, row)` for each row, in parallel when enabled.
#[cfg(feature = "parallel")]
pub(crate) fn fill_rows<F>(buf: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    buf.par_chunks_mut(width)
        .enumerate()
        .for_each(|(t, row)| f(t, row));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn fill_rows<F>(buf: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]),
{
    for (t, row) in buf.chunks_mut(width).enumerate() {
        f(t, row);
    }
}

/// Run `f` on a thread pool with `threads` workers (`None` = default pool).
///
/// Without the `parallel` feature `f` runs on the calling thread and
/// `threads` is ignored. Results do not depend on the worker count.
#[cfg(feature = "parallel")]
pub fn run_with_threads<R, F>(threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool construction")
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn run_with_threads<R, F>(_threads: Option<usize>, f: F) -> R
where
    F: FnOnce() -> R,
{
    f()
}

/// `"parallel"` or `"sequential"`, matching how this build was compiled.
pub fn execution_mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}
