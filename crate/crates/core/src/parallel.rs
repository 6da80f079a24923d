//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these fan out over rayon; without it
//! they run sequentially. Results are collected in input order and reduced
//! sequentially afterwards, so outputs are identical regardless of thread
//! count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sizes the global rayon pool. Call once, before any parallel work; later
/// calls are ignored. A no-op without the `parallel` feature.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) {
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) {}

pub(crate) fn try_map_collect<T, U, F>(items: &[T], f: F) -> crate::error::Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> crate::error::Result<U> + Sync + Send,
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

pub(crate) fn map_indices<U, F>(n: usize, f: F) -> Vec<U>
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
