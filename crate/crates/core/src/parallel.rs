use rayon::prelude::*;

use crate::error::{Error, Result};

/// `(0..n).map(f)` on `workers` threads, results in index order. `workers <= 1`
/// runs on the calling thread.
pub(crate) fn map_indexed<U, F>(n: usize, workers: usize, f: F) -> Result<Vec<U>>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    if workers <= 1 {
        return Ok((0..n).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}
