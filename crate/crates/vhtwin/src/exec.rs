//! Thread pool and wall clock for the core run loops.

use std::time::Instant;

use rayon::prelude::*;
use vhtwin_core::exec::{Clock, Executor};

use crate::error::{Error, Result};

/// Environment variable capping intra-run parallelism; 0 or unset is serial.
pub const THREADS_ENV: &str = "VHTWIN_THREADS";

/// Serial, or a rayon pool. Results always come back in input order.
pub enum Pool {
    Serial,
    Rayon(rayon::ThreadPool),
}

impl Pool {
    pub fn with_threads(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Ok(Pool::Serial);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map(Pool::Rayon)
            .map_err(|e| Error::config(THREADS_ENV, e.to_string()))
    }

    pub fn from_env() -> Result<Self> {
        match std::env::var(THREADS_ENV) {
            Err(_) => Ok(Pool::Serial),
            Ok(v) => {
                let n = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(THREADS_ENV, format!("expected a thread count, got `{v}`")))?;
                Self::with_threads(n)
            }
        }
    }
}

impl Executor for Pool {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        match self {
            Pool::Serial => items.into_iter().map(f).collect(),
            Pool::Rayon(pool) => pool.install(|| items.into_par_iter().map(f).collect()),
        }
    }
}

pub struct WallClock(Instant);

impl WallClock {
    pub fn new() -> Self {
        WallClock(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now_s(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_keeps_order() {
        let items: Vec<u64> = (0..1000).collect();
        let serial = Pool::Serial.map(items.clone(), |x| x * x);
        let pooled = Pool::with_threads(4).unwrap().map(items, |x| x * x);
        assert_eq!(serial, pooled);
    }
}
