//! Thin wrapper over rayon so the crate also builds without threads
//! (for example in the browser demo).
//!
//! Work is always split into a fixed, input-determined set of tasks whose
//! results are reduced in index order; the thread count only changes who
//! computes each task.

use crate::error::{Error, Result};

/// Evaluates `f(0..n)` and returns the results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Runs `op` on a dedicated pool with `threads` workers.
#[cfg(feature = "parallel")]
pub fn with_threads<R, F>(threads: usize, op: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if threads == 0 {
        return Err(Error::InvalidParameter("thread count must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(op))
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R, F>(threads: usize, op: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if threads == 0 {
        return Err(Error::InvalidParameter("thread count must be positive".into()));
    }
    Ok(op())
}
