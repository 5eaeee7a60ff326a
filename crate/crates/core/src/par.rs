//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] runs on the
//! rayon pool; without it every call runs sequentially. Both modes return
//! identical results: searches report the match with the lowest index.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build can actually run in parallel.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// The first `i` in `start..end` for which `f` returns `Some`, with its value.
pub fn find_first<T, F>(start: u64, end: u64, exec: Exec, f: F) -> Option<(u64, T)>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (start..end)
            .into_par_iter()
            .find_map_first(|i| f(i).map(|t| (i, t)));
    }
    let _ = exec;
    (start..end).find_map(|i| f(i).map(|t| (i, t)))
}

/// `f` applied to every index in `0..n`, in index order.
pub fn map_indices<T, F>(n: u64, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}
