use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::ledger::CommLedger;
use crate::dcs::ClusterAssignment;
use crate::error::{Error, Result};
use crate::forecast::TwinModel;

/// The global twin and a counter of how often its parameters changed.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalTwin {
    pub model: TwinModel,
    pub version: u64,
}

impl GlobalTwin {
    pub fn new(model: TwinModel) -> Self {
        Self { model, version: 0 }
    }

    /// Replaces the parameters, bumping the version only if they differ.
    /// Returns whether anything changed.
    pub fn replace(&mut self, model: TwinModel) -> bool {
        let changed = model.params != self.model.params;
        if changed {
            self.version += 1;
        }
        self.model = model;
        changed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTwin {
    pub cluster_id: usize,
    pub model: TwinModel,
    pub member_ids: Vec<usize>,
}

/// Element-wise unweighted mean of the parameter vectors.
///
/// Computed as `first + sum(x_i - first) / k`, which returns the input
/// bit-for-bit when all models are identical.
pub fn fedavg<'a, I>(models: I) -> Result<TwinModel>
where
    I: IntoIterator<Item = &'a TwinModel>,
{
    let mut iter = models.into_iter();
    let first = iter.next().ok_or(Error::EmptyModelList)?;
    let mut acc = alloc::vec![0.0; first.params.len()];
    let mut count = 1usize;
    for m in iter {
        if !m.compatible_with(first) {
            return Err(Error::ArchMismatch);
        }
        for ((a, p), f) in acc.iter_mut().zip(&m.params).zip(&first.params) {
            *a += p - f;
        }
        count += 1;
    }
    let k = count as f64;
    let params = first
        .params
        .iter()
        .zip(&acc)
        .map(|(f, a)| f + a / k)
        .collect();
    Ok(TwinModel {
        params,
        ..first.clone()
    })
}

/// Mean squared per-parameter difference between a cluster twin and the
/// global twin.
pub fn deviation(cluster: &TwinModel, global: &TwinModel) -> Result<f64> {
    if cluster.params.len() != global.params.len() {
        return Err(Error::DimensionMismatch {
            expected: global.params.len(),
            got: cluster.params.len(),
        });
    }
    if cluster.params.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = cluster
        .params
        .iter()
        .zip(&global.params)
        .map(|(c, g)| (c - g) * (c - g))
        .sum();
    Ok(sum / cluster.params.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VRound {
    /// Cluster twins in cluster-id order.
    pub clusters: Vec<ClusterTwin>,
    pub global: TwinModel,
}

/// One synchronous hierarchical aggregation: members to cluster twins, then
/// cluster twins to the global twin, each by FedAvg.
///
/// Every cluster must contain at least one station with a model.
pub fn v_round(
    locals: &BTreeMap<usize, TwinModel>,
    clusters: &ClusterAssignment,
    ledger: &mut CommLedger,
) -> Result<VRound> {
    hierarchical_round(locals, clusters, ledger, false)
}

/// Shared by [`v_round`] and the vertical run loop; with `skip_empty` a
/// cluster without any contributing member is left out instead of failing.
pub(crate) fn hierarchical_round(
    locals: &BTreeMap<usize, TwinModel>,
    clusters: &ClusterAssignment,
    ledger: &mut CommLedger,
    skip_empty: bool,
) -> Result<VRound> {
    let mut out = Vec::new();
    for (cid, members) in clusters.clusters().into_iter().enumerate() {
        let present: Vec<usize> = members.into_iter().filter(|m| locals.contains_key(m)).collect();
        if present.is_empty() {
            if skip_empty {
                continue;
            }
            return Err(Error::EmptyCluster { cluster: cid });
        }
        let model = fedavg(present.iter().map(|m| &locals[m]))?;
        out.push(ClusterTwin {
            cluster_id: cid,
            model,
            member_ids: present,
        });
    }
    for id in locals.keys() {
        if *id >= clusters.len() {
            return Err(Error::invalid("station with a model is not assigned to a cluster"));
        }
    }
    let global = fedavg(out.iter().map(|c| &c.model))?;
    let m = locals.len() as u64;
    let c = out.len() as u64;
    ledger.uploads += m + c;
    ledger.broadcasts += c + m;
    Ok(VRound {
        clusters: out,
        global,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::Arch;
    use alloc::vec;

    fn model(params: &[f64]) -> TwinModel {
        TwinModel {
            arch: Arch::Linear,
            input_dim: params.len() - 1,
            params: params.to_vec(),
        }
    }

    #[test]
    fn fedavg_cases() {
        let avg = fedavg([&model(&[1.0, 2.0]), &model(&[3.0, 4.0])]).unwrap();
        assert_eq!(avg.params, vec![2.0, 3.0]);
        let m = model(&[0.1, 0.7]);
        assert_eq!(fedavg([&m]).unwrap(), m);
        assert_eq!(fedavg([&m, &m, &m]).unwrap(), m);
        assert_eq!(fedavg(Vec::<&TwinModel>::new()), Err(Error::EmptyModelList));
        assert_eq!(
            fedavg([&m, &model(&[1.0, 2.0, 3.0])]),
            Err(Error::ArchMismatch)
        );
    }

    #[test]
    fn deviation_cases() {
        let a = model(&[0.0, 0.0]);
        assert_eq!(deviation(&a, &a).unwrap(), 0.0);
        assert_eq!(deviation(&a, &model(&[2.0, 0.0])).unwrap(), 2.0);
        assert!(deviation(&a, &model(&[1.0, 1.0, 1.0])).is_err());
    }

    fn locals(values: &[f64]) -> BTreeMap<usize, TwinModel> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, model(&[v, 0.0])))
            .collect()
    }

    #[test]
    fn equal_clusters_match_flat_average() {
        let l = locals(&[0.0, 2.0, 4.0, 6.0]);
        let a = ClusterAssignment::from_labels(&[0, 0, 1, 1]);
        let mut ledger = CommLedger::default();
        let r = v_round(&l, &a, &mut ledger).unwrap();
        assert_eq!(r.clusters[0].model.params[0], 1.0);
        assert_eq!(r.clusters[1].model.params[0], 5.0);
        assert_eq!(r.global.params[0], 3.0);
        assert_eq!(ledger.uploads, 4 + 2);
        assert_eq!(ledger.broadcasts, 2 + 4);
    }

    #[test]
    fn unequal_clusters_weight_by_cluster() {
        let l = locals(&[0.0, 3.0, 3.0, 3.0]);
        let a = ClusterAssignment::from_labels(&[0, 1, 1, 1]);
        let r = v_round(&l, &a, &mut CommLedger::default()).unwrap();
        assert_eq!(r.clusters[0].model.params[0], 0.0);
        assert_eq!(r.clusters[1].model.params[0], 3.0);
        assert_eq!(r.global.params[0], 1.5);
    }

    #[test]
    fn one_cluster_equals_fedavg() {
        let l = locals(&[0.3, 1.7, -2.2, 9.1, 0.05]);
        let r = v_round(&l, &ClusterAssignment::single(5), &mut CommLedger::default()).unwrap();
        assert_eq!(r.global, fedavg(l.values()).unwrap());
    }

    #[test]
    fn empty_cluster_is_an_error() {
        let mut l = locals(&[1.0, 2.0, 3.0]);
        l.remove(&2);
        let a = ClusterAssignment::from_labels(&[0, 0, 1]);
        assert_eq!(
            v_round(&l, &a, &mut CommLedger::default()),
            Err(Error::EmptyCluster { cluster: 1 })
        );
        let r = hierarchical_round(&l, &a, &mut CommLedger::default(), true).unwrap();
        assert_eq!(r.clusters.len(), 1);
    }

    #[test]
    fn version_counts_changes() {
        let mut g = GlobalTwin::new(model(&[1.0, 0.0]));
        assert!(!g.replace(model(&[1.0, 0.0])));
        assert!(g.replace(model(&[2.0, 0.0])));
        assert_eq!(g.version, 1);
    }
}
