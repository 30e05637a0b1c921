use std::sync::Arc;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{invalid, Result};

/// Environment variable consulted for the default worker count.
pub const THREADS_ENV: &str = "ADASPMV_THREADS";

/// A fixed number of logical workers backed by a thread pool. Kernels split
/// their work into exactly `count()` pieces; results come back in worker
/// order regardless of scheduling.
#[derive(Clone)]
pub struct Workers {
    count: usize,
    pool: Option<Arc<ThreadPool>>,
}

impl std::fmt::Debug for Workers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workers").field("count", &self.count).finish()
    }
}

impl Workers {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return invalid("worker count must be at least 1");
        }
        let pool = if count > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .thread_name(|i| format!("adaspmv-worker-{i}"))
                .build()
                .map_err(|e| crate::Error::InvalidInput(format!("cannot build worker pool: {e}")))?;
            Some(Arc::new(pool))
        } else {
            None
        };
        Ok(Self { count, pool })
    }

    pub fn single() -> Self {
        Self { count: 1, pool: None }
    }

    /// Worker count from `ADASPMV_THREADS`, else the hardware parallelism.
    pub fn from_env() -> Result<Self> {
        let count = match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .map_err(|_| crate::Error::InvalidInput(format!("{THREADS_ENV}='{v}' is not a count")))?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        Self::new(count)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Runs `f(w)` for every worker index and collects results in order.
    pub fn map<R, F>(&self, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match &self.pool {
            None => (0..self.count).map(f).collect(),
            Some(pool) => pool.install(|| (0..self.count).into_par_iter().map(f).collect()),
        }
    }

    /// Runs `f(w, chunk)` over disjoint mutable chunks, one per worker.
    pub fn map_chunks<T, R, F>(&self, chunks: Vec<&mut [T]>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, &mut [T]) -> R + Sync + Send,
    {
        match &self.pool {
            None => chunks.into_iter().enumerate().map(|(w, c)| f(w, c)).collect(),
            Some(pool) => pool.install(|| chunks.into_par_iter().enumerate().map(|(w, c)| f(w, c)).collect()),
        }
    }

    /// Runs `f` inside the pool so rayon parallel iterators use it.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            None => f(),
            Some(pool) => pool.install(f),
        }
    }
}

/// Splits `data` into the given increasing, disjoint ranges. Gaps between
/// ranges are skipped.
pub(crate) fn split_ranges_mut<'a, T>(mut data: &'a mut [T], ranges: &[std::ops::Range<usize>]) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(ranges.len());
    let mut consumed = 0;
    for r in ranges {
        debug_assert!(r.start >= consumed && r.end >= r.start);
        let (_, rest) = std::mem::take(&mut data).split_at_mut(r.start - consumed);
        let (chunk, rest) = rest.split_at_mut(r.end - r.start);
        out.push(chunk);
        data = rest;
        consumed = r.end;
    }
    out
}
