use alloc::vec::Vec;

/// Message and update counters of one twinning phase.
///
/// `uploads` and `broadcasts` count transfers on the tiers that reach the
/// global twin: station-to-cluster and cluster-to-global in the synchronous
/// phase, cluster-to-global only in the asynchronous phase. Transfers inside
/// a cluster during the asynchronous phase go to `intra_cluster_transfers`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CommLedger {
    pub uploads: u64,
    pub broadcasts: u64,
    pub global_updates: u64,
    pub intra_cluster_transfers: u64,
    /// Measured compute time of the phase.
    pub wall_clock_s: f64,
}

impl CommLedger {
    /// Uploads plus broadcasts.
    pub fn messages(&self) -> u64 {
        self.uploads + self.broadcasts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Synchronous initialisation from historical data.
    Vertical,
    /// Asynchronous evolution from the data stream.
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Stations, cluster twins and a global twin.
    Hierarchical,
    /// Plain FedAvg across all stations.
    SingleLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Clustering {
        /// Round (vertical) or tick (horizontal) at which clustering ran.
        at: usize,
        num_clusters: usize,
        modularity: Option<f64>,
    },
    SyncRound {
        /// Round index (vertical) or tick (horizontal baseline).
        at: usize,
        participants: usize,
        clusters: usize,
        mean_loss: f64,
        uploads: u64,
        broadcasts: u64,
        changed: bool,
    },
    ClusterFiring {
        tick: usize,
        cluster: usize,
        members_trained: usize,
        epsilon: f64,
        triggered: bool,
        changed: bool,
        uploads: u64,
        broadcasts: u64,
        intra_cluster_transfers: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwinningTrace {
    pub phase: Phase,
    pub scheme: Scheme,
    pub events: Vec<TraceEvent>,
    pub ledger: CommLedger,
    /// Transfers times the configured per-transfer time.
    pub modeled_transfer_s: f64,
    pub num_clusters: usize,
}

impl TwinningTrace {
    pub(crate) fn new(phase: Phase, scheme: Scheme) -> Self {
        Self {
            phase,
            scheme,
            events: Vec::new(),
            ledger: CommLedger::default(),
            modeled_transfer_s: 0.0,
            num_clusters: 0,
        }
    }

    /// Measured compute time plus modelled transfer time.
    pub fn mapping_time_s(&self) -> f64 {
        self.ledger.wall_clock_s + self.modeled_transfer_s
    }

    /// Recomputes the ledger counters from the event log.
    pub fn replay_ledger(&self) -> CommLedger {
        let mut l = CommLedger {
            wall_clock_s: self.ledger.wall_clock_s,
            ..CommLedger::default()
        };
        for e in &self.events {
            match *e {
                TraceEvent::Clustering { .. } => {}
                TraceEvent::SyncRound {
                    uploads,
                    broadcasts,
                    changed,
                    ..
                } => {
                    l.uploads += uploads;
                    l.broadcasts += broadcasts;
                    l.global_updates += changed as u64;
                }
                TraceEvent::ClusterFiring {
                    uploads,
                    broadcasts,
                    triggered,
                    intra_cluster_transfers,
                    ..
                } => {
                    l.uploads += uploads;
                    l.broadcasts += broadcasts;
                    l.global_updates += triggered as u64;
                    l.intra_cluster_transfers += intra_cluster_transfers;
                }
            }
        }
        l
    }

    /// Deviations of every cluster firing, in processing order.
    pub fn epsilons(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().filter_map(|e| match e {
            TraceEvent::ClusterFiring { epsilon, .. } => Some(*epsilon),
            _ => None,
        })
    }

    /// Number of events that changed the global parameters.
    pub fn parameter_changes(&self) -> u64 {
        self.events
            .iter()
            .filter(|e| {
                matches!(
                    e,
                    TraceEvent::SyncRound { changed: true, .. }
                        | TraceEvent::ClusterFiring { changed: true, .. }
                )
            })
            .count() as u64
    }
}
