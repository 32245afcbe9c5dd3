use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::aggregate::{deviation, fedavg, ClusterTwin, GlobalTwin};
use super::ledger::{CommLedger, Phase, Scheme, TraceEvent, TwinningTrace};
use super::participation::select_participants;
use super::vertical::recluster;
use super::{check_counts, mean, train_all, PhaseOutcome};
use crate::dcs::{ClusterAssignment, DcsConfig};
use crate::error::{Error, Result};
use crate::exec::{Clock, Executor};
use crate::forecast::{Sample, TrainConfig, TwinModel, WindowedDataset};
use crate::rng;
use crate::topology::Network;

/// How a triggered cluster moves the global twin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateMode {
    /// Global becomes the mean of the latest model of every cluster.
    Average,
    /// Global moves a step `eta` toward the firing cluster's model;
    /// `None` uses `1 / C`.
    Incremental { eta: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HStep {
    pub epsilon: f64,
    pub triggered: bool,
    /// Whether the global parameters actually changed.
    pub changed: bool,
}

/// Threshold-gated push of one cluster twin into the global twin.
///
/// `latest` holds the most recent upload of every cluster, indexed by
/// cluster id; the entry of `cluster` is taken from `cluster.model`. The
/// global is updated only when the deviation is strictly above `psi`.
pub fn h_step(
    cluster: &ClusterTwin,
    global: &GlobalTwin,
    latest: &[TwinModel],
    psi: f64,
    mode: UpdateMode,
    ledger: &mut CommLedger,
) -> Result<(GlobalTwin, HStep)> {
    if !(psi >= 0.0) {
        return Err(Error::invalid("threshold must be non-negative"));
    }
    let c = latest.len();
    if cluster.cluster_id >= c {
        return Err(Error::invalid("cluster id outside the cluster list"));
    }
    let epsilon = deviation(&cluster.model, &global.model)?;
    ledger.uploads += 1;
    let mut next = global.clone();
    if epsilon <= psi {
        return Ok((
            next,
            HStep {
                epsilon,
                triggered: false,
                changed: false,
            },
        ));
    }
    let model = match mode {
        UpdateMode::Average => fedavg(latest.iter().enumerate().map(|(i, m)| {
            if i == cluster.cluster_id {
                &cluster.model
            } else {
                m
            }
        }))?,
        UpdateMode::Incremental { eta } => {
            let eta = eta.unwrap_or(1.0 / c as f64);
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::invalid("step size must lie in (0, 1]"));
            }
            let params = global
                .model
                .params
                .iter()
                .zip(&cluster.model.params)
                .map(|(g, a)| if eta == 1.0 { *a } else { g + eta * (a - g) })
                .collect();
            TwinModel {
                params,
                ..global.model.clone()
            }
        }
    };
    let changed = next.replace(model);
    ledger.global_updates += 1;
    ledger.broadcasts += c as u64;
    Ok((
        next,
        HStep {
            epsilon,
            triggered: true,
            changed,
        },
    ))
}

/// Cluster `c` fires at ticks `offset, offset + period, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiringSchedule {
    pub offset: usize,
    pub period: usize,
}

impl FiringSchedule {
    pub fn fires(&self, tick: usize) -> bool {
        tick >= self.offset && (tick - self.offset).is_multiple_of(self.period)
    }

    fn seeded(seed: u64, cluster: usize, min: usize, max: usize) -> Self {
        let mut r = rng::rng_for(seed, rng::SCHEDULE, cluster as u64);
        let period = r.random_range(min..=max);
        let offset = r.random_range(0..period);
        Self { offset, period }
    }
}

/// Streaming inputs; entry `i` of every slice belongs to station `i`.
#[derive(Debug, Clone, Copy)]
pub struct StreamInputs<'a> {
    pub network: &'a Network,
    /// Raw historical traffic.
    pub history: &'a [Vec<f64>],
    /// Raw streamed traffic; clustering sees the prefix that has arrived.
    pub stream: &'a [Vec<f64>],
    /// Normalised training samples with the tick at which each arrives,
    /// sorted by tick.
    pub arrivals: &'a [Vec<(usize, Sample)>],
    /// Number of ticks to simulate.
    pub horizon: usize,
}

impl StreamInputs<'_> {
    fn validate(&self) -> Result<()> {
        let m = self.network.len();
        if m == 0 {
            return Err(Error::EmptyGraph);
        }
        check_counts(m, self.history.len())?;
        check_counts(m, self.stream.len())?;
        check_counts(m, self.arrivals.len())?;
        for a in self.arrivals {
            if a.windows(2).any(|w| w[0].0 > w[1].0) {
                return Err(Error::invalid("arrivals must be sorted by tick"));
            }
        }
        Ok(())
    }

    fn series_until(&self, tick: usize) -> Vec<Vec<f64>> {
        self.history
            .iter()
            .zip(self.stream)
            .map(|(h, s)| {
                let mut v = h.clone();
                v.extend_from_slice(&s[..tick.min(s.len())]);
                v
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HConfig {
    /// Segments the stream is divided into.
    pub epochs: usize,
    /// Segments between clustering refreshes.
    pub dcs_period: usize,
    pub psi: f64,
    pub mode: UpdateMode,
    pub local_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Buffered samples a station needs before it trains.
    pub batch_threshold: usize,
    pub period_min: usize,
    pub period_max: usize,
    /// Explicit firing schedules, indexed by cluster id (cycled if short).
    pub schedules: Option<Vec<FiringSchedule>>,
    /// Ticks between rounds of the single-level baseline.
    pub sync_period: usize,
    pub participation: f64,
    pub transfer_time_s: f64,
    pub seed: u64,
    pub dcs: DcsConfig,
}

impl Default for HConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            dcs_period: 5,
            psi: 1e-4,
            mode: UpdateMode::Average,
            local_epochs: 1,
            learning_rate: 0.05,
            batch_size: 64,
            batch_threshold: 4,
            period_min: 2,
            period_max: 6,
            schedules: None,
            sync_period: 4,
            participation: 1.0,
            transfer_time_s: 0.01,
            seed: 0,
            dcs: DcsConfig::default(),
        }
    }
}

impl HConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.dcs_period == 0 {
            return Err(Error::invalid("epochs and clustering period must be at least 1"));
        }
        if !(self.psi >= 0.0) {
            return Err(Error::invalid("threshold must be non-negative"));
        }
        if let UpdateMode::Incremental { eta: Some(eta) } = self.mode {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::invalid("step size must lie in (0, 1]"));
            }
        }
        if self.batch_threshold == 0 {
            return Err(Error::invalid("batch threshold must be at least 1"));
        }
        if self.period_min == 0 || self.period_min > self.period_max {
            return Err(Error::invalid("firing periods must satisfy 1 <= min <= max"));
        }
        if let Some(s) = &self.schedules {
            if s.is_empty() || s.iter().any(|f| f.period == 0) {
                return Err(Error::invalid("explicit schedules need a positive period"));
            }
        }
        if self.sync_period == 0 {
            return Err(Error::invalid("sync period must be at least 1"));
        }
        if !(self.participation > 0.0 && self.participation <= 1.0) {
            return Err(Error::invalid("participation fraction must lie in (0, 1]"));
        }
        if !(self.transfer_time_s >= 0.0 && self.transfer_time_s.is_finite()) {
            return Err(Error::invalid("transfer time must be finite and non-negative"));
        }
        self.train_config(0).validate()
    }

    fn train_config(&self, tick: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.local_epochs,
            seed: rng::derive_seed(self.seed, rng::TRAIN, tick as u64),
        }
    }

    fn schedule(&self, cluster: usize) -> FiringSchedule {
        match &self.schedules {
            Some(s) => s[cluster % s.len()],
            None => FiringSchedule::seeded(self.seed, cluster, self.period_min, self.period_max),
        }
    }

    /// Ticks at which clustering is refreshed.
    fn recluster_ticks(&self, horizon: usize) -> Vec<usize> {
        (1..self.epochs)
            .filter(|k| k % self.dcs_period == 0)
            .map(|k| k * horizon / self.epochs)
            .collect()
    }
}

struct Buffers {
    pending: Vec<Vec<Sample>>,
    cursor: Vec<usize>,
}

impl Buffers {
    fn new(m: usize) -> Self {
        Self {
            pending: vec![Vec::new(); m],
            cursor: vec![0; m],
        }
    }

    fn deliver(&mut self, arrivals: &[Vec<(usize, Sample)>], tick: usize) {
        for (i, a) in arrivals.iter().enumerate() {
            while let Some((t, s)) = a.get(self.cursor[i]) {
                if *t > tick {
                    break;
                }
                self.pending[i].push(s.clone());
                self.cursor[i] += 1;
            }
        }
    }

    fn ready(&self, station: usize, threshold: usize) -> bool {
        self.pending[station].len() >= threshold
    }

    fn take(&mut self, station: usize) -> WindowedDataset {
        WindowedDataset {
            samples: core::mem::take(&mut self.pending[station]),
        }
    }
}

/// Asynchronous hierarchical evolution of the global twin.
///
/// Without an `assignment` the stations are clustered at tick 0.
pub fn run_h_twinning<E: Executor, C: Clock>(
    inputs: &StreamInputs<'_>,
    start_global: &GlobalTwin,
    assignment: Option<&ClusterAssignment>,
    cfg: &HConfig,
    exec: &E,
    clock: &C,
) -> Result<PhaseOutcome> {
    inputs.validate()?;
    cfg.validate()?;
    let start = clock.now_s();
    let m = inputs.network.len();
    let ids: Vec<usize> = (0..m).collect();
    let mut trace = TwinningTrace::new(Phase::Horizontal, Scheme::Hierarchical);
    let mut global = start_global.clone();

    let mut assignment = match assignment {
        Some(a) => {
            check_counts(m, a.len())?;
            a.clone()
        }
        None => cluster_at(inputs, &cfg.dcs, 0, &mut trace)?,
    };
    let mut local_models = vec![global.model.clone(); m];
    let mut cluster_models = vec![global.model.clone(); assignment.num_clusters()];
    let mut latest = cluster_models.clone();
    let mut schedules: Vec<FiringSchedule> =
        (0..assignment.num_clusters()).map(|c| cfg.schedule(c)).collect();
    let reclusters = cfg.recluster_ticks(inputs.horizon);
    let mut buffers = Buffers::new(m);

    for tick in 0..inputs.horizon {
        buffers.deliver(inputs.arrivals, tick);
        if reclusters.contains(&tick) {
            assignment = cluster_at(inputs, &cfg.dcs, tick, &mut trace)?;
            cluster_models = assignment
                .clusters()
                .iter()
                .map(|members| fedavg(members.iter().map(|&i| &local_models[i])))
                .collect::<Result<_>>()?;
            latest = cluster_models.clone();
            schedules = (0..assignment.num_clusters()).map(|c| cfg.schedule(c)).collect();
        }

        let participants = select_participants(&ids, cfg.participation, tick as u64, cfg.seed)?;
        let mut firing: Vec<(usize, Vec<usize>)> = Vec::new();
        for (cid, members) in assignment.clusters().into_iter().enumerate() {
            if !schedules[cid].fires(tick) {
                continue;
            }
            let ready: Vec<usize> = members
                .into_iter()
                .filter(|&s| participants.binary_search(&s).is_ok())
                .filter(|&s| buffers.ready(s, cfg.batch_threshold))
                .collect();
            if !ready.is_empty() {
                firing.push((cid, ready));
            }
        }
        if firing.is_empty() {
            continue;
        }

        let owned: Vec<(usize, WindowedDataset)> = firing
            .iter()
            .flat_map(|(_, ready)| ready.iter().copied())
            .map(|s| (s, buffers.take(s)))
            .collect();
        let model_for: Vec<&TwinModel> = (0..m)
            .map(|s| &cluster_models[assignment.cluster_of(s)])
            .collect();
        let jobs = owned.iter().map(|(s, d)| (*s, d)).collect();
        let trained = train_all(exec, &model_for, jobs, cfg.train_config(tick))?;
        for (s, o) in trained {
            local_models[s] = o.model;
        }

        for (cid, ready) in firing {
            let alpha = fedavg(ready.iter().map(|&s| &local_models[s]))?;
            let cluster = ClusterTwin {
                cluster_id: cid,
                model: alpha,
                member_ids: ready,
            };
            let k = cluster.member_ids.len() as u64;
            let mut step_ledger = CommLedger::default();
            let (next, step) = h_step(&cluster, &global, &latest, cfg.psi, cfg.mode, &mut step_ledger)?;
            latest[cid] = cluster.model.clone();
            cluster_models[cid] = cluster.model;
            if step.triggered {
                global = next;
                for cm in cluster_models.iter_mut() {
                    cm.clone_from(&global.model);
                }
            }
            step_ledger.intra_cluster_transfers = 2 * k;
            add(&mut trace.ledger, &step_ledger);
            trace.events.push(TraceEvent::ClusterFiring {
                tick,
                cluster: cid,
                members_trained: k as usize,
                epsilon: step.epsilon,
                triggered: step.triggered,
                changed: step.changed,
                uploads: step_ledger.uploads,
                broadcasts: step_ledger.broadcasts,
                intra_cluster_transfers: step_ledger.intra_cluster_transfers,
            });
        }
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

/// Single-level streaming baseline: every `sync_period` ticks all ready
/// stations train from the global twin and FedAvg replaces it.
pub fn run_h_single_level<E: Executor, C: Clock>(
    inputs: &StreamInputs<'_>,
    start_global: &GlobalTwin,
    cfg: &HConfig,
    exec: &E,
    clock: &C,
) -> Result<PhaseOutcome> {
    inputs.validate()?;
    cfg.validate()?;
    let start = clock.now_s();
    let m = inputs.network.len();
    let ids: Vec<usize> = (0..m).collect();
    let mut trace = TwinningTrace::new(Phase::Horizontal, Scheme::SingleLevel);
    let mut global = start_global.clone();
    let mut buffers = Buffers::new(m);

    for tick in 0..inputs.horizon {
        buffers.deliver(inputs.arrivals, tick);
        if (tick + 1) % cfg.sync_period != 0 {
            continue;
        }
        let participants = select_participants(&ids, cfg.participation, tick as u64, cfg.seed)?;
        let ready: Vec<usize> = participants
            .iter()
            .copied()
            .filter(|&s| buffers.ready(s, cfg.batch_threshold))
            .collect();
        if ready.is_empty() {
            continue;
        }
        let owned: Vec<(usize, WindowedDataset)> =
            ready.iter().map(|&s| (s, buffers.take(s))).collect();
        let model_for = vec![&global.model; m];
        let jobs = owned.iter().map(|(s, d)| (*s, d)).collect();
        let trained = train_all(exec, &model_for, jobs, cfg.train_config(tick))?;
        let mean_loss = mean(
            trained
                .iter()
                .map(|(_, o)| o.epoch_losses.last().copied().unwrap_or(0.0)),
        );
        let next = fedavg(trained.iter().map(|(_, o)| &o.model))?;
        let changed = global.replace(next);
        let uploads = trained.len() as u64;
        let broadcasts = participants.len() as u64;
        trace.ledger.uploads += uploads;
        trace.ledger.broadcasts += broadcasts;
        trace.ledger.global_updates += changed as u64;
        trace.events.push(TraceEvent::SyncRound {
            at: tick,
            participants: trained.len(),
            clusters: 1,
            mean_loss,
            uploads,
            broadcasts,
            changed,
        });
    }

    trace.num_clusters = 1;
    trace.ledger.wall_clock_s = (clock.now_s() - start).max(0.0);
    trace.modeled_transfer_s = trace.ledger.messages() as f64 * cfg.transfer_time_s;
    Ok(PhaseOutcome {
        global,
        trace,
        assignment: ClusterAssignment::single(m),
    })
}

fn cluster_at(
    inputs: &StreamInputs<'_>,
    cfg: &DcsConfig,
    tick: usize,
    trace: &mut TwinningTrace,
) -> Result<ClusterAssignment> {
    let owned = inputs.series_until(tick);
    let series: Vec<&[f64]> = owned.iter().map(Vec::as_slice).collect();
    recluster(inputs.network, &series, cfg, tick, trace)
}

fn add(into: &mut CommLedger, from: &CommLedger) {
    into.uploads += from.uploads;
    into.broadcasts += from.broadcasts;
    into.global_updates += from.global_updates;
    into.intra_cluster_transfers += from.intra_cluster_transfers;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::Arch;

    fn model(params: &[f64]) -> TwinModel {
        TwinModel {
            arch: Arch::Linear,
            input_dim: params.len() - 1,
            params: params.to_vec(),
        }
    }

    fn twin(cid: usize, params: &[f64]) -> ClusterTwin {
        ClusterTwin {
            cluster_id: cid,
            model: model(params),
            member_ids: vec![0],
        }
    }

    #[test]
    fn below_threshold_keeps_global() {
        let g = GlobalTwin::new(model(&[0.0, 0.0]));
        let mut ledger = CommLedger::default();
        let c = twin(0, &[0.1, 0.0]);
        let (next, step) = h_step(&c, &g, std::slice::from_ref(&c.model), 1.0, UpdateMode::Average, &mut ledger).unwrap();
        assert!(!step.triggered);
        assert_eq!(next, g);
        assert_eq!((ledger.uploads, ledger.broadcasts, ledger.global_updates), (1, 0, 0));
    }

    #[test]
    fn threshold_is_strict() {
        let g = GlobalTwin::new(model(&[0.0, 0.0]));
        let c = twin(0, &[2.0, 0.0]);
        let l = [c.model.clone()];
        let (_, step) = h_step(&c, &g, &l, 2.0, UpdateMode::Average, &mut CommLedger::default()).unwrap();
        assert_eq!(step.epsilon, 2.0);
        assert!(!step.triggered);
        let (_, step) = h_step(&c, &g, &l, 1.999, UpdateMode::Average, &mut CommLedger::default()).unwrap();
        assert!(step.triggered);
    }

    #[test]
    fn single_cluster_average_adopts_cluster() {
        let g = GlobalTwin::new(model(&[0.0, 0.0]));
        let c = twin(0, &[0.5, -0.5]);
        let mut ledger = CommLedger::default();
        let (next, step) = h_step(&c, &g, &[model(&[9.0, 9.0])], 0.0, UpdateMode::Average, &mut ledger).unwrap();
        assert!(step.triggered && step.changed);
        assert_eq!(next.model, c.model);
        assert_eq!(next.version, 1);
        assert_eq!((ledger.uploads, ledger.broadcasts, ledger.global_updates), (1, 1, 1));
    }

    #[test]
    fn average_uses_latest_of_every_cluster() {
        let g = GlobalTwin::new(model(&[0.0, 0.0]));
        let latest = [model(&[1.0, 0.0]), model(&[3.0, 0.0]), model(&[5.0, 0.0])];
        let c = twin(1, &[0.0, 3.0]);
        let mut ledger = CommLedger::default();
        let (next, _) = h_step(&c, &g, &latest, 0.0, UpdateMode::Average, &mut ledger).unwrap();
        assert_eq!(next.model.params, vec![2.0, 1.0]);
        assert_eq!(ledger.broadcasts, 3);
    }

    #[test]
    fn incremental_steps_toward_cluster() {
        let g = GlobalTwin::new(model(&[0.0, 4.0]));
        let c = twin(0, &[2.0, 0.0]);
        let latest = [c.model.clone(), model(&[0.0, 0.0])];
        let mode = UpdateMode::Incremental { eta: None };
        let (next, _) = h_step(&c, &g, &latest, 0.0, mode, &mut CommLedger::default()).unwrap();
        assert_eq!(next.model.params, vec![1.0, 2.0]);
        let mode = UpdateMode::Incremental { eta: Some(1.0) };
        let (next, _) = h_step(&c, &g, &latest, 0.0, mode, &mut CommLedger::default()).unwrap();
        assert_eq!(next.model, c.model);
    }

    #[test]
    fn identical_second_cluster_has_zero_deviation() {
        let mut g = GlobalTwin::new(model(&[0.0, 0.0]));
        let a = twin(0, &[0.4, 0.2]);
        let b = twin(1, &[0.4, 0.2]);
        let latest = [a.model.clone(), b.model.clone()];
        let mode = UpdateMode::Incremental { eta: Some(1.0) };
        let mut ledger = CommLedger::default();
        let (next, s1) = h_step(&a, &g, &latest, 0.0, mode, &mut ledger).unwrap();
        assert!(s1.triggered);
        g = next;
        let (_, s2) = h_step(&b, &g, &latest, 0.0, mode, &mut ledger).unwrap();
        assert_eq!(s2.epsilon, 0.0);
        assert!(!s2.triggered);
        assert_eq!(ledger.global_updates, 1);
    }

    #[test]
    fn schedule_fires_on_period() {
        let s = FiringSchedule { offset: 2, period: 3 };
        let ticks: Vec<usize> = (0..12).filter(|&t| s.fires(t)).collect();
        assert_eq!(ticks, vec![2, 5, 8, 11]);
        for c in 0..20 {
            let f = FiringSchedule::seeded(5, c, 2, 6);
            assert!((2..=6).contains(&f.period) && f.offset < f.period);
        }
    }

    #[test]
    fn recluster_ticks_split_segments() {
        let cfg = HConfig::default();
        assert_eq!(cfg.recluster_ticks(200), vec![50, 100, 150]);
    }
}
