//! Louvain modularity maximisation on phi-weighted edges.
//!
//! Phase 1 visits nodes in a seeded shuffled order and moves each one to
//! the neighbouring community with the largest modularity gain until a full
//! pass makes no move. Phase 2 contracts communities into super-nodes. The
//! two phases repeat until a level improves modularity by less than
//! [`LOUVAIN_TOLERANCE`].

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::modularity::modularity;
use super::ClusterAssignment;
use crate::rng;
use crate::topology::RelationshipGraph;

pub const LOUVAIN_TOLERANCE: f64 = 1e-9;

/// Minimum gain for a single node move; guards against cycling on float noise.
const MOVE_EPS: f64 = 1e-12;
const MAX_PASSES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainOutcome {
    pub assignment: ClusterAssignment,
    /// Weighted modularity of the flat partition: singletons first, then
    /// after every accepted level.
    pub modularity_trace: Vec<f64>,
}

pub fn cluster_adaptive(graph: &RelationshipGraph, seed: u64) -> ClusterAssignment {
    louvain(graph, seed).assignment
}

pub fn louvain(graph: &RelationshipGraph, seed: u64) -> LouvainOutcome {
    let n = graph.n();
    let singletons = ClusterAssignment::singletons(n);
    let Ok(q0) = modularity(graph, &singletons, true) else {
        // no edges: nothing to merge
        return LouvainOutcome {
            assignment: singletons,
            modularity_trace: Vec::new(),
        };
    };

    let mut level = Level::from_graph(graph);
    // flat[v] = super-node of original node v at the current level
    let mut flat: Vec<usize> = (0..n).collect();
    let mut trace = vec![q0];
    let mut best = singletons;

    for depth in 0.. {
        let comm = level.local_moves(seed, depth);
        let (relabelled, count) = compact(&comm);
        if count == level.len() {
            break;
        }
        let candidate_flat: Vec<usize> = flat.iter().map(|&s| relabelled[s]).collect();
        let candidate = ClusterAssignment::from_labels(&candidate_flat);
        let q = modularity(graph, &candidate, true).unwrap_or(f64::NEG_INFINITY);
        let prev = *trace.last().unwrap();
        if q < prev {
            break;
        }
        trace.push(q);
        best = candidate;
        if q - prev < LOUVAIN_TOLERANCE {
            break;
        }
        level = level.contract(&relabelled, count);
        flat = candidate_flat;
    }
    LouvainOutcome {
        assignment: best,
        modularity_trace: trace,
    }
}

/// Renumbers labels to `0..count` in order of first appearance.
fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; labels.len()];
    let mut next = 0;
    let out = labels
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect();
    (out, next)
}

/// Weighted graph at one aggregation level. `degree[i]` counts a self-loop
/// twice, so `sum(degree) = 2W`.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    degree: Vec<f64>,
    two_w: f64,
}

impl Level {
    fn from_graph(graph: &RelationshipGraph) -> Self {
        let n = graph.n();
        let mut adj = vec![Vec::new(); n];
        let mut degree = vec![0.0; n];
        for e in graph.edges() {
            adj[e.a].push((e.b, e.phi));
            adj[e.b].push((e.a, e.phi));
            degree[e.a] += e.phi;
            degree[e.b] += e.phi;
        }
        let two_w = degree.iter().sum();
        Self {
            adj,
            self_loop: vec![0.0; n],
            degree,
            two_w,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn local_moves(&self, seed: u64, depth: usize) -> Vec<usize> {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut total: Vec<f64> = self.degree.clone();
        let mut link = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();

        for pass in 0..MAX_PASSES {
            let mut r = rng::rng_for(seed, rng::LOUVAIN, ((depth as u64) << 32) | pass as u64);
            order.shuffle(&mut r);
            let mut moved = false;
            for &node in &order {
                let k = self.degree[node];
                let own = comm[node];
                for &c in &touched {
                    link[c] = 0.0;
                }
                touched.clear();
                touched.push(own);
                for &(nb, w) in &self.adj[node] {
                    let c = comm[nb];
                    if link[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    link[c] += w;
                }
                total[own] -= k;
                // gain (scaled by W) of inserting the isolated node into c
                let gain = |c: usize| link[c] - total[c] * k / self.two_w;
                let mut best = own;
                let mut best_gain = gain(own);
                // ascending community order keeps the choice independent of
                // adjacency order
                touched.sort_unstable();
                for &c in &touched {
                    let g = gain(c);
                    if g > best_gain + MOVE_EPS * self.two_w {
                        best = c;
                        best_gain = g;
                    }
                }
                total[best] += k;
                if best != own {
                    comm[node] = best;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
        comm
    }

    fn contract(&self, comm: &[usize], count: usize) -> Level {
        let mut self_loop = vec![0.0; count];
        let mut degree = vec![0.0; count];
        let mut weights: Vec<alloc::collections::BTreeMap<usize, f64>> =
            vec![Default::default(); count];
        for v in 0..self.len() {
            let cv = comm[v];
            degree[cv] += self.degree[v];
            self_loop[cv] += self.self_loop[v];
            for &(u, w) in &self.adj[v] {
                let cu = comm[u];
                if cu == cv {
                    // each intra edge is seen from both ends
                    self_loop[cv] += w / 2.0;
                } else {
                    *weights[cv].entry(cu).or_insert(0.0) += w;
                }
            }
        }
        let adj = weights
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        Level {
            adj,
            self_loop,
            degree,
            two_w: self.two_w,
        }
    }
}
