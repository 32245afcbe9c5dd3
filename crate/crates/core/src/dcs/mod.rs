//! Dynamic connectivity segmentation: clusters base stations by their
//! relationship graph, either into a fixed number of clusters by iterative
//! edge removal or adaptively by modularity maximisation.

mod betweenness;
mod fixed;
mod louvain;
mod modularity;

use alloc::vec;
use alloc::vec::Vec;

pub use betweenness::{edge_betweenness, LengthMode};
pub use fixed::{cluster_fixed, cluster_fixed_with_removals, Strategy};
pub use louvain::{cluster_adaptive, louvain, LouvainOutcome, LOUVAIN_TOLERANCE};
pub use modularity::modularity;

use crate::error::{Error, Result};
use crate::topology::{self, Network, PhiConfig, RelationshipGraph};

/// Partition of stations `0..n` into clusters `0..num_clusters`.
///
/// Cluster ids are ordered by the smallest member id, so cluster 0 always
/// contains station 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    num_clusters: usize,
}

impl ClusterAssignment {
    /// Builds an assignment from arbitrary labels, re-indexing clusters by
    /// their smallest member.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap: Vec<Option<usize>> = Vec::new();
        let mut next = 0;
        let mut out = Vec::with_capacity(labels.len());
        for &l in labels {
            if l >= remap.len() {
                remap.resize(l + 1, None);
            }
            let id = *remap[l].get_or_insert_with(|| {
                next += 1;
                next - 1
            });
            out.push(id);
        }
        Self {
            labels: out,
            num_clusters: next,
        }
    }

    pub fn single(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn cluster_of(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Members of every cluster, each list in ascending station order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_clusters];
        for (node, &c) in self.labels.iter().enumerate() {
            out[c].push(node);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMode {
    Fixed(usize),
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcsConfig {
    pub phi: PhiConfig,
    pub mode: ClusterMode,
    pub strategy: Strategy,
    /// Histogram bins for the traffic similarity attribute.
    pub bins: usize,
    pub seed: u64,
}

impl Default for DcsConfig {
    fn default() -> Self {
        Self {
            phi: PhiConfig::default(),
            mode: ClusterMode::Fixed(5),
            strategy: Strategy::MinWeight,
            bins: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcsOutcome {
    pub assignment: ClusterAssignment,
    pub graph: RelationshipGraph,
    /// Weighted modularity of the assignment, `None` for an edgeless graph.
    pub modularity: Option<f64>,
}

/// Runs the full segmentation pipeline: attributes, relationship graph,
/// then fixed or adaptive clustering. `series[i]` is the traffic history of
/// station `i`.
pub fn dcs(network: &Network, series: &[&[f64]], cfg: &DcsConfig) -> Result<DcsOutcome> {
    let attrs = topology::compute_attributes(&network.stations, series, cfg.bins)?;
    let graph = topology::build_relationship_graph(&network.topology, &attrs, &cfg.phi)?;
    let assignment = match cfg.mode {
        ClusterMode::Fixed(0) => return Err(Error::invalid("cluster count must be at least 1")),
        ClusterMode::Fixed(c) => cluster_fixed(&graph, c, cfg.strategy)?,
        ClusterMode::Adaptive => cluster_adaptive(&graph, cfg.seed),
    };
    let modularity = modularity(&graph, &assignment, true).ok();
    Ok(DcsOutcome {
        assignment,
        graph,
        modularity,
    })
}

/// Adjacency view over a subset of a relationship graph's edges.
#[derive(Debug, Clone)]
pub(crate) struct Adjacency {
    /// Per node: `(neighbour, edge index, phi)`.
    pub(crate) nbrs: Vec<Vec<(usize, usize, f64)>>,
}

impl Adjacency {
    pub(crate) fn new(graph: &RelationshipGraph, active: &[bool]) -> Self {
        let mut nbrs = vec![Vec::new(); graph.n()];
        for (idx, e) in graph.edges().iter().enumerate() {
            if active[idx] {
                nbrs[e.a].push((e.b, idx, e.phi));
                nbrs[e.b].push((e.a, idx, e.phi));
            }
        }
        Self { nbrs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{BaseStation, NetworkGraph, Point};

    #[test]
    fn labels_are_reindexed_by_smallest_member() {
        let a = ClusterAssignment::from_labels(&[7, 3, 7, 9]);
        assert_eq!(a.labels(), &[0, 1, 0, 2]);
        assert_eq!(a.num_clusters(), 3);
        assert_eq!(a.clusters(), vec![vec![0, 2], vec![1], vec![3]]);
    }

    fn two_group_network() -> (Network, Vec<Vec<f64>>) {
        // two groups of four stations, 5 km apart, with very different traffic
        let mut stations = Vec::new();
        let mut series = Vec::new();
        for id in 0..8 {
            let group = id / 4;
            let x = group as f64 * 5000.0 + (id % 4) as f64 * 50.0;
            stations.push(BaseStation {
                id,
                position: Point::new(x, 0.0),
                coverage_radius: 100.0,
                backhaul_capacity: if group == 0 { 100.0 } else { 1000.0 },
                series_ref: id as u64,
            });
            let level = if group == 0 { 1.0 } else { 50.0 };
            series.push((0..48).map(|t| level + (t % 4) as f64 * 0.1).collect());
        }
        // each group is a clique; two links join them
        let edges = (0..8)
            .flat_map(|a| ((a + 1)..8).map(move |b| (a, b)))
            .filter(|&(a, b)| a / 4 == b / 4 || (a, b) == (0, 4) || (a, b) == (3, 7));
        let topo = NetworkGraph::from_edges(8, edges).unwrap();
        (Network::new(stations, topo).unwrap(), series)
    }

    #[test]
    fn dcs_recovers_separated_groups() {
        let (net, series) = two_group_network();
        let refs: Vec<&[f64]> = series.iter().map(|s| s.as_slice()).collect();
        for strategy in [Strategy::MinWeight, Strategy::MaxBetweenness] {
            let cfg = DcsConfig {
                mode: ClusterMode::Fixed(2),
                strategy,
                ..DcsConfig::default()
            };
            let out = dcs(&net, &refs, &cfg).unwrap();
            assert_eq!(out.assignment.labels(), &[0, 0, 0, 0, 1, 1, 1, 1], "{strategy:?}");
        }
        let cfg = DcsConfig {
            mode: ClusterMode::Adaptive,
            ..DcsConfig::default()
        };
        let out = dcs(&net, &refs, &cfg).unwrap();
        assert_eq!(out.assignment.labels(), &[0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(dcs(&net, &refs, &cfg).unwrap(), out);
    }

    #[test]
    fn dcs_single_station() {
        let stations = vec![BaseStation {
            id: 0,
            position: Point::new(0.0, 0.0),
            coverage_radius: 10.0,
            backhaul_capacity: 10.0,
            series_ref: 0,
        }];
        let net = Network::new(stations, NetworkGraph::from_edges(1, []).unwrap()).unwrap();
        let s = [1.0, 2.0];
        for mode in [ClusterMode::Fixed(1), ClusterMode::Adaptive] {
            let cfg = DcsConfig {
                mode,
                ..DcsConfig::default()
            };
            let out = dcs(&net, &[&s], &cfg).unwrap();
            assert_eq!(out.assignment.num_clusters(), 1);
            assert_eq!(out.modularity, None);
        }
    }
}
