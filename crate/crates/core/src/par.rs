//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature disabled, [`Execution::Parallel`] silently runs
//! sequentially, so callers never need to branch on the feature themselves.

use serde::{Deserialize, Serialize};

/// How independent work items (line solves, path batches) are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work is actually dispatched to the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Calls `f(chunk_index, chunk)` for every `chunk_len`-sized chunk of `data`.
pub fn for_each_chunk_mut<T, F>(exec: Execution, data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if chunk_len == 0 || data.is_empty() {
        return;
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Fallible [`for_each_chunk_mut`]; stops at the first error encountered.
pub fn try_for_each_chunk_mut<T, E, F>(exec: Execution, data: &mut [T], chunk_len: usize, f: F) -> Result<(), E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut [T]) -> Result<(), E> + Sync + Send,
{
    if chunk_len == 0 || data.is_empty() {
        return Ok(());
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return data
            .par_chunks_mut(chunk_len)
            .enumerate()
            .try_for_each(|(i, c)| f(i, c));
    }
    let _ = exec;
    data.chunks_mut(chunk_len)
        .enumerate()
        .try_for_each(|(i, c)| f(i, c))
}

/// Evaluates `f(0..n)` and collects the results in index order.
pub fn map_indices<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Reduces `f(i)` over `0..n` with `combine`; the combination order is the
/// index order regardless of scheduling, so results are bit-identical across
/// worker counts.
pub fn map_reduce_ordered<R, F, C>(exec: Execution, n: usize, f: F, init: R, combine: C) -> R
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
    C: Fn(R, R) -> R,
{
    map_indices(exec, n, f).into_iter().fold(init, combine)
}
