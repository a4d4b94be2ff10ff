//! Per-node data parallelism with a sequential fallback.
//!
//! Every helper produces its output in node order regardless of how the
//! work is split, so parallel and sequential runs are bit-identical as long
//! as each closure is deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum number of nodes handed to one rayon task.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    #[default]
    Sequential,
    /// Uses the ambient rayon pool. Falls back to sequential execution when
    /// the crate is built without the `parallel` feature.
    Parallel,
}

impl Parallelism {
    pub fn is_available(self) -> bool {
        match self {
            Parallelism::Sequential => true,
            Parallelism::Parallel => cfg!(feature = "parallel"),
        }
    }
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_nodes<T, F>(par: Parallelism, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => (0..n).into_par_iter().with_min_len(MIN_CHUNK).map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Like [`map_nodes`], with a per-worker scratch value built by `init`.
pub fn map_nodes_with<S, T, I, F>(par: Parallelism, n: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => (0..n)
            .into_par_iter()
            .with_min_len(MIN_CHUNK)
            .map_init(&init, |s, i| f(s, i))
            .collect(),
        _ => {
            let mut scratch = init();
            (0..n).map(|i| f(&mut scratch, i)).collect()
        }
    }
}

/// Runs `f` inside a dedicated pool of `threads` workers. With the
/// `parallel` feature disabled, or `threads <= 1`, `f` runs on the caller's
/// thread.
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if threads > 1 {
            match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(pool) => return pool.install(f),
                Err(e) => log::warn!("could not build a {threads}-thread pool: {e}"),
            }
        }
    }
    let _ = threads;
    f()
}
