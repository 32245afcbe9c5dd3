//! Fixed-count clustering by iterative edge removal.

use alloc::vec;
use alloc::vec::Vec;

use super::betweenness::{betweenness_masked, LengthMode};
use super::ClusterAssignment;
use crate::error::{Error, Result};
use crate::topology::{RelationshipGraph, UnionFind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Remove the weakest relationship (minimum phi) first.
    MinWeight,
    /// Girvan-Newman: remove the edge with the highest betweenness, with
    /// edge lengths `1/phi`.
    MaxBetweenness,
}

/// Removes edges one at a time until the graph has exactly `clusters`
/// connected components, which become the clusters. Ties go to the
/// lexicographically smallest edge.
pub fn cluster_fixed(
    graph: &RelationshipGraph,
    clusters: usize,
    strategy: Strategy,
) -> Result<ClusterAssignment> {
    cluster_fixed_with_removals(graph, clusters, strategy).map(|(a, _)| a)
}

/// Like [`cluster_fixed`] but also returns the removed edges in order.
pub fn cluster_fixed_with_removals(
    graph: &RelationshipGraph,
    clusters: usize,
    strategy: Strategy,
) -> Result<(ClusterAssignment, Vec<(usize, usize)>)> {
    let n = graph.n();
    if clusters == 0 {
        return Err(Error::invalid("cluster count must be at least 1"));
    }
    if clusters > n {
        return Err(Error::TooManyClusters {
            requested: clusters,
            nodes: n,
        });
    }
    let edges = graph.edges();
    let mut active = vec![true; edges.len()];
    let components = |active: &[bool]| {
        let mut uf = UnionFind::new(n);
        for (e, _) in edges.iter().zip(active).filter(|(_, &on)| on) {
            uf.union(e.a, e.b);
        }
        uf
    };
    let initial = components(&active).components;
    if initial > clusters {
        return Err(Error::TooManyComponents {
            components: initial,
            requested: clusters,
        });
    }

    // edges are stored sorted by (a, b), so a stable sort keeps the
    // lexicographic tie-break
    let mut by_weight: Vec<usize> = (0..edges.len()).collect();
    by_weight.sort_by(|&x, &y| edges[x].phi.total_cmp(&edges[y].phi));
    let mut next_light = by_weight.into_iter();

    let mut removed = Vec::new();
    let mut uf = components(&active);
    while uf.components < clusters {
        let victim = match strategy {
            Strategy::MinWeight => next_light.next(),
            Strategy::MaxBetweenness => {
                let score = betweenness_masked(graph, &active, LengthMode::InversePhi);
                let mut best: Option<usize> = None;
                for (i, &s) in score.iter().enumerate() {
                    if active[i] && best.is_none_or(|b| s > score[b]) {
                        best = Some(i);
                    }
                }
                best
            }
        };
        // more components requested than nodes would have been rejected above
        let victim = victim.expect("edges exhausted before reaching the component count");
        active[victim] = false;
        removed.push((edges[victim].a, edges[victim].b));
        uf = components(&active);
    }
    let labels: Vec<usize> = (0..n).map(|v| uf.find(v)).collect();
    Ok((ClusterAssignment::from_labels(&labels), removed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_k4_with_bridge() -> RelationshipGraph {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for a in 0..4 {
                for b in (a + 1)..4 {
                    edges.push((base + a, base + b, 1.0));
                }
            }
        }
        edges.push((3, 4, 0.01));
        RelationshipGraph::from_weighted_edges(8, edges).unwrap()
    }

    #[test]
    fn recovers_cliques() {
        let g = two_k4_with_bridge();
        for strategy in [Strategy::MinWeight, Strategy::MaxBetweenness] {
            let (a, removed) = cluster_fixed_with_removals(&g, 2, strategy).unwrap();
            assert_eq!(a.labels(), &[0, 0, 0, 0, 1, 1, 1, 1]);
            assert_eq!(removed, vec![(3, 4)]);
        }
    }

    #[test]
    fn one_cluster_needs_no_removals() {
        let g = two_k4_with_bridge();
        let (a, removed) = cluster_fixed_with_removals(&g, 1, Strategy::MinWeight).unwrap();
        assert_eq!(a.num_clusters(), 1);
        assert!(removed.is_empty());
    }

    #[test]
    fn n_clusters_isolates_everything() {
        let g = two_k4_with_bridge();
        for strategy in [Strategy::MinWeight, Strategy::MaxBetweenness] {
            let a = cluster_fixed(&g, 8, strategy).unwrap();
            assert_eq!(a, ClusterAssignment::singletons(8));
        }
    }

    #[test]
    fn errors() {
        let g = two_k4_with_bridge();
        assert!(matches!(
            cluster_fixed(&g, 9, Strategy::MinWeight),
            Err(Error::TooManyClusters { .. })
        ));
        let split = RelationshipGraph::from_weighted_edges(4, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            cluster_fixed(&split, 2, Strategy::MinWeight),
            Err(Error::TooManyComponents { components: 3, requested: 2 })
        ));
    }

    #[test]
    fn ties_break_on_smallest_edge() {
        // square with equal weights: removing (0,1) then (0,3) isolates node 0
        let g = RelationshipGraph::from_weighted_edges(
            4,
            [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)],
        )
        .unwrap();
        let (a, removed) = cluster_fixed_with_removals(&g, 2, Strategy::MinWeight).unwrap();
        assert_eq!(removed, vec![(0, 1), (0, 3)]);
        assert_eq!(a.labels(), &[0, 1, 1, 1]);
    }
}
