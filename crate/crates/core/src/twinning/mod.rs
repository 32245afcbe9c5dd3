//! Hierarchical twin aggregation.
//!
//! The vertical phase initialises the global twin from historical data in
//! synchronous rounds (stations, then cluster twins, then the global twin).
//! The horizontal phase keeps it current from streaming data: clusters fire
//! asynchronously and only push into the global twin when their deviation
//! exceeds a threshold. Both phases have a single-level FedAvg counterpart.

mod aggregate;
mod horizontal;
mod ledger;
mod participation;
mod vertical;

pub use aggregate::{deviation, fedavg, v_round, ClusterTwin, GlobalTwin, VRound};
pub use horizontal::{
    h_step, run_h_single_level, run_h_twinning, FiringSchedule, HConfig, HStep, StreamInputs,
    UpdateMode,
};
pub use ledger::{CommLedger, Phase, Scheme, TraceEvent, TwinningTrace};
pub use participation::select_participants;
pub use vertical::{run_single_level, run_v_twinning, StationInputs, VConfig};

use alloc::vec::Vec;

use crate::dcs::ClusterAssignment;
use crate::error::{Error, Result};
use crate::forecast::{local_train, TrainConfig, TrainOutcome, TwinModel, WindowedDataset};
use crate::exec::Executor;

/// Result of one phase run.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutcome {
    pub global: GlobalTwin,
    pub trace: TwinningTrace,
    /// Clustering in force at the end of the run; a single cluster for the
    /// single-level schemes.
    pub assignment: ClusterAssignment,
}

/// Trains `model` on every `(station, dataset)` job and returns the outcomes
/// in job order, or the first error in that order.
pub(crate) fn train_all<E: Executor>(
    exec: &E,
    model_for: &[&TwinModel],
    jobs: Vec<(usize, &WindowedDataset)>,
    cfg: TrainConfig,
) -> Result<Vec<(usize, TrainOutcome)>> {
    let results = exec.map(jobs, |(id, data)| {
        (id, local_train(model_for[id], data, &cfg))
    });
    results
        .into_iter()
        .map(|(id, r)| r.map(|o| (id, o)))
        .collect()
}

pub(crate) fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub(crate) fn check_counts(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
