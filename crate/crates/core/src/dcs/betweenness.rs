//! Edge betweenness (Brandes' accumulation), unit or `1/phi` edge lengths.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::Adjacency;
use crate::topology::RelationshipGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthMode {
    /// Every edge has length `1 / phi`: strong relationships are short.
    InversePhi,
    Unit,
}

/// Relative tolerance under which two weighted path lengths count as equal.
const PATH_TIE_TOL: f64 = 1e-12;

/// Betweenness of every edge, in the graph's edge order. Each unordered
/// node pair contributes once; disconnected pairs contribute nothing.
pub fn edge_betweenness(graph: &RelationshipGraph, mode: LengthMode) -> Vec<f64> {
    let active = vec![true; graph.edges().len()];
    betweenness_masked(graph, &active, mode)
}

pub(crate) fn betweenness_masked(
    graph: &RelationshipGraph,
    active: &[bool],
    mode: LengthMode,
) -> Vec<f64> {
    let adj = Adjacency::new(graph, active);
    let n = graph.n();
    let mut score = vec![0.0; graph.edges().len()];
    let mut sp = ShortestPaths::new(n);
    for source in 0..n {
        match mode {
            LengthMode::Unit => sp.bfs(&adj, source),
            LengthMode::InversePhi => sp.dijkstra(&adj, source),
        }
        sp.accumulate(&mut score);
    }
    // every unordered pair was visited from both ends
    for s in &mut score {
        *s /= 2.0;
    }
    score
}

struct ShortestPaths {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    /// Predecessors as `(node, edge index)`.
    preds: Vec<Vec<(usize, usize)>>,
    /// Nodes in order of non-decreasing distance.
    order: Vec<usize>,
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node id
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl ShortestPaths {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
            order: Vec::with_capacity(n),
        }
    }

    fn reset(&mut self, source: usize) {
        self.dist.fill(f64::INFINITY);
        self.sigma.fill(0.0);
        self.delta.fill(0.0);
        self.preds.iter_mut().for_each(Vec::clear);
        self.order.clear();
        self.dist[source] = 0.0;
        self.sigma[source] = 1.0;
    }

    fn bfs(&mut self, adj: &Adjacency, source: usize) {
        self.reset(source);
        let mut queue = alloc::collections::VecDeque::new();
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            self.order.push(v);
            for &(w, e, _) in &adj.nbrs[v] {
                if self.dist[w].is_infinite() {
                    self.dist[w] = self.dist[v] + 1.0;
                    queue.push_back(w);
                }
                if self.dist[w] == self.dist[v] + 1.0 {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push((v, e));
                }
            }
        }
    }

    fn dijkstra(&mut self, adj: &Adjacency, source: usize) {
        self.reset(source);
        let mut done = vec![false; self.dist.len()];
        let mut heap = BinaryHeap::new();
        heap.push(HeapItem(0.0, source));
        while let Some(HeapItem(d, v)) = heap.pop() {
            if done[v] || d > self.dist[v] {
                continue;
            }
            done[v] = true;
            self.order.push(v);
            for &(w, e, phi) in &adj.nbrs[v] {
                if done[w] {
                    continue;
                }
                let alt = d + 1.0 / phi;
                let cur = self.dist[w];
                let tol = PATH_TIE_TOL * alt.max(1.0);
                if alt < cur - tol {
                    self.dist[w] = alt;
                    self.sigma[w] = self.sigma[v];
                    self.preds[w].clear();
                    self.preds[w].push((v, e));
                    heap.push(HeapItem(alt, w));
                } else if (alt - cur).abs() <= tol {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push((v, e));
                }
            }
        }
    }

    fn accumulate(&mut self, score: &mut [f64]) {
        for &w in self.order.iter().rev() {
            for &(v, e) in &self.preds[w] {
                let c = self.sigma[v] / self.sigma[w] * (1.0 + self.delta[w]);
                score[e] += c;
                self.delta[v] += c;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;

    fn unit_graph(n: usize, edges: &[(usize, usize)]) -> RelationshipGraph {
        RelationshipGraph::from_weighted_edges(n, edges.iter().map(|&(a, b)| (a, b, 1.0))).unwrap()
    }

    /// Brute force: enumerate every simple path between every pair, keep the
    /// shortest ones, and credit each edge with its share.
    fn brute_force(g: &RelationshipGraph, unit: bool) -> Vec<f64> {
        let n = g.n();
        let edge_index: BTreeMap<(usize, usize), usize> = g
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.a, e.b), i))
            .collect();
        let len = |a: usize, b: usize| {
            let phi = g.phi(a, b).unwrap();
            if unit {
                1.0
            } else {
                1.0 / phi
            }
        };
        let mut score = vec![0.0; g.edges().len()];
        for s in 0..n {
            for t in (s + 1)..n {
                let mut paths: Vec<(f64, Vec<usize>)> = Vec::new();
                let mut stack = vec![(s, vec![s], 0.0)];
                while let Some((v, path, d)) = stack.pop() {
                    if v == t {
                        paths.push((d, path));
                        continue;
                    }
                    for w in 0..n {
                        if g.phi(v, w).is_some() && !path.contains(&w) {
                            let mut p = path.clone();
                            p.push(w);
                            stack.push((w, p, d + len(v, w)));
                        }
                    }
                }
                if paths.is_empty() {
                    continue;
                }
                let best = paths.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                let shortest: Vec<_> = paths
                    .iter()
                    .filter(|p| (p.0 - best).abs() <= 1e-12 * best.max(1.0))
                    .collect();
                let share = 1.0 / shortest.len() as f64;
                for (_, p) in shortest {
                    for w in p.windows(2) {
                        score[edge_index[&(w[0].min(w[1]), w[0].max(w[1]))]] += share;
                    }
                }
            }
        }
        score
    }

    #[test]
    fn path_graph() {
        let g = unit_graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(edge_betweenness(&g, LengthMode::Unit), vec![2.0, 2.0]);
    }

    #[test]
    fn triangle() {
        let g = unit_graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(edge_betweenness(&g, LengthMode::Unit), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn bridge_between_triangles() {
        let g = unit_graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]);
        let b = edge_betweenness(&g, LengthMode::Unit);
        let bridge = g.edges().iter().position(|e| (e.a, e.b) == (2, 3)).unwrap();
        assert_eq!(b[bridge], 9.0);
        for (i, &v) in b.iter().enumerate() {
            if i != bridge {
                assert!(v < 9.0);
            }
        }
        assert_eq!(b, brute_force(&g, true));
    }

    #[test]
    fn weighted_matches_brute_force() {
        let g = RelationshipGraph::from_weighted_edges(
            6,
            [
                (0, 1, 1.0),
                (1, 2, 2.0),
                (0, 2, 0.5),
                (2, 3, 1.0),
                (3, 4, 4.0),
                (4, 5, 1.0),
                (3, 5, 0.5),
                (1, 4, 0.25),
            ],
        )
        .unwrap();
        let got = edge_betweenness(&g, LengthMode::InversePhi);
        let want = brute_force(&g, false);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn disconnected_pairs_contribute_nothing() {
        let g = unit_graph(4, &[(0, 1), (2, 3)]);
        assert_eq!(edge_betweenness(&g, LengthMode::Unit), vec![1.0, 1.0]);
    }

    #[test]
    fn edge_transitive_graph_has_uniform_scores() {
        // cycle C6 and complete K5 are edge-transitive
        let c6: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let k5: Vec<_> = (0..5).flat_map(|a| ((a + 1)..5).map(move |b| (a, b))).collect();
        for (n, edges) in [(6, c6), (5, k5)] {
            let b = edge_betweenness(&unit_graph(n, &edges), LengthMode::Unit);
            assert!(b.iter().all(|&v| (v - b[0]).abs() < 1e-12), "{b:?}");
        }
    }
}
