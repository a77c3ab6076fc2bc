//! Sequential or data-parallel execution of independent index ranges.
//!
//! [`Exec::Parallel`] uses rayon when the `parallel` feature is enabled and
//! silently runs sequentially otherwise. Both modes return results in index
//! order, so callers observe identical output either way.

use std::ops::Range;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether work will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `range.map(f).collect()`, preserving index order.
    pub fn map<T, F>(self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return range.into_par_iter().map(f).collect();
        }
        range.map(f).collect()
    }

    /// Smallest index in `range` for which `f` returns `Some`, with its value.
    pub fn find_first<T, F>(self, range: Range<usize>, f: F) -> Option<(usize, T)>
    where
        T: Send,
        F: Fn(usize) -> Option<T> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return range
                .into_par_iter()
                .filter_map(|i| f(i).map(|v| (i, v)))
                .find_first(|_| true);
        }
        range.into_iter().find_map(|i| f(i).map(|v| (i, v)))
    }
}

/// Runs `f` inside a pool of `threads` workers when parallelism is
/// available; otherwise calls it directly.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool construction");
        return pool.install(f);
    }
    let _ = threads;
    f()
}
