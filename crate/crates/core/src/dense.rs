//! Bookkeeping for dense `n x n` allocations.
//!
//! Every code path that materializes a square dense matrix reports it here.
//! The tracker is thread-local: a solve runs on one thread, so a caller can
//! reset it, run a solve, and read back the largest dense dimension that was
//! touched without interference from other threads.

use std::cell::Cell;

use faer::Mat;

use crate::C64;

/// Default size above which hot paths must stay matrix-free.
pub const DEFAULT_DENSE_THRESHOLD: usize = 256;

thread_local! {
    static MAX_DENSE_DIM: Cell<usize> = const { Cell::new(0) };
    static DENSE_ALLOCS: Cell<usize> = const { Cell::new(0) };
}

/// Clears the per-thread counters.
pub fn reset_tracker() {
    MAX_DENSE_DIM.with(|c| c.set(0));
    DENSE_ALLOCS.with(|c| c.set(0));
}

/// Largest `n` for which an `n x n` dense buffer was allocated on this thread
/// since the last reset.
pub fn max_dense_dim() -> usize {
    MAX_DENSE_DIM.with(|c| c.get())
}

/// Number of dense square allocations on this thread since the last reset.
pub fn dense_alloc_count() -> usize {
    DENSE_ALLOCS.with(|c| c.get())
}

pub(crate) fn zeros(n: usize) -> Mat<C64> {
    MAX_DENSE_DIM.with(|c| c.set(c.get().max(n)));
    DENSE_ALLOCS.with(|c| c.set(c.get() + 1));
    Mat::zeros(n, n)
}
