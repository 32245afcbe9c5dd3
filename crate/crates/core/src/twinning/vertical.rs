use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::aggregate::{fedavg, hierarchical_round, GlobalTwin};
use super::ledger::{CommLedger, Phase, Scheme, TraceEvent, TwinningTrace};
use super::participation::select_participants;
use super::{check_counts, mean, train_all, PhaseOutcome};
use crate::dcs::{dcs, ClusterAssignment, DcsConfig};
use crate::error::{Error, Result};
use crate::exec::{Clock, Executor};
use crate::forecast::{TrainConfig, TwinModel, WindowedDataset};
use crate::rng;
use crate::topology::Network;

/// Per-station inputs; entry `i` of every slice belongs to station `i`.
#[derive(Debug, Clone, Copy)]
pub struct StationInputs<'a> {
    pub network: &'a Network,
    /// Raw historical traffic, used for clustering.
    pub history: &'a [Vec<f64>],
    /// Normalised training windows.
    pub datasets: &'a [WindowedDataset],
}

impl StationInputs<'_> {
    fn validate(&self) -> Result<()> {
        let m = self.network.len();
        if m == 0 {
            return Err(Error::EmptyGraph);
        }
        check_counts(m, self.history.len())?;
        check_counts(m, self.datasets.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VConfig {
    pub rounds: usize,
    /// Rounds between clustering refreshes.
    pub dcs_period: usize,
    pub local_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub participation: f64,
    /// Modelled seconds per model transfer.
    pub transfer_time_s: f64,
    pub seed: u64,
    pub dcs: DcsConfig,
}

impl Default for VConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            dcs_period: 10,
            local_epochs: 1,
            learning_rate: 0.05,
            batch_size: 64,
            participation: 1.0,
            transfer_time_s: 0.01,
            seed: 0,
            dcs: DcsConfig::default(),
        }
    }
}

impl VConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::invalid("rounds must be at least 1"));
        }
        if self.dcs_period == 0 {
            return Err(Error::invalid("clustering period must be at least 1"));
        }
        if !(self.transfer_time_s >= 0.0 && self.transfer_time_s.is_finite()) {
            return Err(Error::invalid("transfer time must be finite and non-negative"));
        }
        if !(self.participation > 0.0 && self.participation <= 1.0) {
            return Err(Error::invalid("participation fraction must lie in (0, 1]"));
        }
        self.train_config(0).validate()
    }

    fn train_config(&self, round: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.local_epochs,
            seed: rng::derive_seed(self.seed, rng::TRAIN, round as u64),
        }
    }
}

/// Synchronous hierarchical initialisation of the global twin.
pub fn run_v_twinning<E: Executor, C: Clock>(
    inputs: &StationInputs<'_>,
    init: &TwinModel,
    cfg: &VConfig,
    exec: &E,
    clock: &C,
) -> Result<PhaseOutcome> {
    run(inputs, init, cfg, exec, clock, Scheme::Hierarchical)
}

/// Synchronous FedAvg across all stations, without clustering.
pub fn run_single_level<E: Executor, C: Clock>(
    inputs: &StationInputs<'_>,
    init: &TwinModel,
    cfg: &VConfig,
    exec: &E,
    clock: &C,
) -> Result<PhaseOutcome> {
    run(inputs, init, cfg, exec, clock, Scheme::SingleLevel)
}

fn run<E: Executor, C: Clock>(
    inputs: &StationInputs<'_>,
    init: &TwinModel,
    cfg: &VConfig,
    exec: &E,
    clock: &C,
    scheme: Scheme,
) -> Result<PhaseOutcome> {
    inputs.validate()?;
    cfg.validate()?;
    let start = clock.now_s();
    let m = inputs.network.len();
    let ids: Vec<usize> = (0..m).collect();
    let series: Vec<&[f64]> = inputs.history.iter().map(Vec::as_slice).collect();
    let mut trace = TwinningTrace::new(Phase::Vertical, scheme);
    let mut global = GlobalTwin::new(init.clone());
    let mut assignment = ClusterAssignment::single(m);

    for round in 0..cfg.rounds {
        if scheme == Scheme::Hierarchical && round % cfg.dcs_period == 0 {
            assignment = recluster(inputs.network, &series, &cfg.dcs, round, &mut trace)?;
        }
        let participants = select_participants(&ids, cfg.participation, round as u64, cfg.seed)?;
        let model_for = vec![&global.model; m];
        let jobs = participants
            .iter()
            .map(|&p| (p, &inputs.datasets[p]))
            .collect();
        let trained = train_all(exec, &model_for, jobs, cfg.train_config(round))?;
        let mean_loss = mean(
            trained
                .iter()
                .map(|(_, o)| o.epoch_losses.last().copied().unwrap_or(0.0)),
        );
        let locals: BTreeMap<usize, TwinModel> =
            trained.into_iter().map(|(id, o)| (id, o.model)).collect();

        let mut round_ledger = CommLedger::default();
        let (new_global, clusters) = match scheme {
            Scheme::Hierarchical => {
                let r = hierarchical_round(&locals, &assignment, &mut round_ledger, true)?;
                (r.global, r.clusters.len())
            }
            Scheme::SingleLevel => {
                let k = locals.len() as u64;
                round_ledger.uploads += k;
                round_ledger.broadcasts += k;
                (fedavg(locals.values())?, 1)
            }
        };
        let changed = global.replace(new_global);
        trace.ledger.uploads += round_ledger.uploads;
        trace.ledger.broadcasts += round_ledger.broadcasts;
        trace.ledger.global_updates += changed as u64;
        trace.events.push(TraceEvent::SyncRound {
            at: round,
            participants: locals.len(),
            clusters,
            mean_loss,
            uploads: round_ledger.uploads,
            broadcasts: round_ledger.broadcasts,
            changed,
        });
    }

    trace.num_clusters = assignment.num_clusters();
    trace.ledger.wall_clock_s = (clock.now_s() - start).max(0.0);
    trace.modeled_transfer_s = trace.ledger.messages() as f64 * cfg.transfer_time_s;
    Ok(PhaseOutcome {
        global,
        trace,
        assignment,
    })
}

pub(crate) fn recluster(
    network: &Network,
    series: &[&[f64]],
    cfg: &DcsConfig,
    at: usize,
    trace: &mut TwinningTrace,
) -> Result<ClusterAssignment> {
    let out = dcs(network, series, cfg)?;
    trace.events.push(TraceEvent::Clustering {
        at,
        num_clusters: out.assignment.num_clusters(),
        modularity: out.modularity,
    });
    Ok(out.assignment)
}
