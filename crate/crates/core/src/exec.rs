//! Injection points for the things a `no_std` core cannot own: a wall clock
//! and a thread pool.

use alloc::vec::Vec;

/// Source of elapsed seconds. Only differences between readings are used.
pub trait Clock {
    fn now_s(&self) -> f64;
}

/// A clock that never advances. Runs timed with it report zero seconds.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_s(&self) -> f64 {
        0.0
    }
}

/// Maps independent jobs to results. Implementations must return results in
/// input order so that reductions stay deterministic.
pub trait Executor {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        items.into_iter().map(f).collect()
    }
}
