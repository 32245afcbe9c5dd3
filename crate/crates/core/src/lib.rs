//! Deterministic core of the VH-Twin network twinning simulator.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure algorithms:
//!
//! * [`topology`]: base stations, regular network topologies, pairwise
//!   attributes and the relationship graph built from them.
//! * [`dcs`]: dynamic connectivity segmentation (fixed-count edge removal and
//!   Louvain modularity maximisation).
//! * [`forecast`]: sliding-window datasets, regression twins and SGD.
//! * [`twinning`]: FedAvg, synchronous vertical twinning, threshold-gated
//!   asynchronous horizontal twinning and the single-level baseline.
//! * [`series`]: synthetic traffic, normalisation and splitting.
//! * [`metrics`]: MSE, MAE and NRMSE.
//!
//! Wall-clock time and parallel execution are injected through the
//! [`exec::Clock`] and [`exec::Executor`] traits so that IO-free callers can
//! run everything serially.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dcs;
pub mod error;
pub mod exec;
pub mod forecast;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod series;
pub mod topology;
pub mod twinning;

pub use error::{Error, Result};
