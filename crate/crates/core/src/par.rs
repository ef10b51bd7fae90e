//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers fan out over rayon's pool unless
//! [`set_exec`] selected [`Exec::Sequential`]; without it they always run
//! sequentially. Reductions built on [`map_indexed`] combine partial results
//! in index order, so parallel and sequential runs give identical floats.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Parallel,
    Sequential,
}

static EXEC: AtomicU8 = AtomicU8::new(0);

/// Selects the execution mode for the whole process.
pub fn set_exec(exec: Exec) {
    EXEC.store(
        match exec {
            Exec::Parallel => 0,
            Exec::Sequential => 1,
        },
        Ordering::Relaxed,
    );
}

/// Effective execution mode.
pub fn exec() -> Exec {
    if cfg!(feature = "parallel") && EXEC.load(Ordering::Relaxed) == 0 {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

/// Calls `f(row_index, row)` for each `row_len`-sized chunk of `data`.
pub fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    assert!(row_len > 0, "row length must be positive");
    #[cfg(feature = "parallel")]
    if exec() == Exec::Parallel {
        use rayon::prelude::*;
        data.par_chunks_mut(row_len).enumerate().for_each(|(y, row)| f(y, row));
        return;
    }
    data.chunks_mut(row_len).enumerate().for_each(|(y, row)| f(y, row));
}

/// `(0..n).map(f).collect()`, possibly in parallel, preserving order.
pub fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec() == Exec::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}
