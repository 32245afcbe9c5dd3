//! Base stations, network topologies and the weighted relationship graph
//! that drives clustering.
//!
//! Pairwise attributes:
//!
//! * `g`: Euclidean distance between stations, metres.
//! * `k`: backhaul similarity, `min(cap) / max(cap)`.
//! * `beta`: Jaccard overlap of the two coverage disks.
//! * `tau`: cosine similarity of the two traffic value histograms.
//!
//! The relationship weight of an edge is
//! `phi = w_g / max(g, g_floor) + w_k * k + w_beta * beta + w_tau * tau`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

/// Side length of one grid cell of the Milan telecom grid, metres.
pub const GRID_CELL_M: f64 = 235.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation {
    pub id: usize,
    pub position: Point,
    /// Coverage radius in metres, strictly positive.
    pub coverage_radius: f64,
    /// Backhaul capacity in Mbps, strictly positive.
    pub backhaul_capacity: f64,
    /// Identifier of the traffic series this station owns (grid cell id for
    /// real data, the station id for synthetic data).
    pub series_ref: u64,
}

impl BaseStation {
    pub fn validate(&self) -> Result<()> {
        if !(self.coverage_radius > 0.0 && self.coverage_radius.is_finite()) {
            return Err(Error::invalid("coverage radius must be positive"));
        }
        if !(self.backhaul_capacity > 0.0 && self.backhaul_capacity.is_finite()) {
            return Err(Error::invalid("backhaul capacity must be positive"));
        }
        if !(self.position.x.is_finite() && self.position.y.is_finite()) {
            return Err(Error::invalid("station position must be finite"));
        }
        Ok(())
    }
}

/// Checks that ids are exactly `0..n` in list order and every station is valid.
pub fn validate_roster(stations: &[BaseStation]) -> Result<()> {
    for (pos, s) in stations.iter().enumerate() {
        if s.id != pos {
            return Err(Error::invalid(alloc::format!(
                "station ids must be contiguous from 0, found id {} at position {}",
                s.id,
                pos
            )));
        }
        s.validate()?;
    }
    Ok(())
}

/// Scatters `n` stations into `groups` spatially separated blobs.
///
/// With one group the stations are spread uniformly over a square whose
/// density matches one station per grid cell. Groups are placed 20 cells
/// apart along the x axis. Coverage radii are drawn in `[0.5, 1.0]` grid
/// cells and backhaul capacities from a small set of link classes.
pub fn generate_stations(n: usize, groups: usize, seed: u64) -> Vec<BaseStation> {
    const LINK_CLASSES: [f64; 4] = [100.0, 200.0, 500.0, 1000.0];
    let groups = groups.max(1);
    let mut rng = rng::rng_for(seed, rng::STATIONS, 0);
    let per_group = n.div_ceil(groups).max(1);
    let side = libm::sqrt(per_group as f64) * GRID_CELL_M;
    (0..n)
        .map(|id| {
            let group = id * groups / n.max(1);
            let cx = group as f64 * 20.0 * GRID_CELL_M;
            let x = cx + rng.random::<f64>() * side;
            let y = rng.random::<f64>() * side;
            let coverage_radius = GRID_CELL_M * (0.5 + 0.5 * rng.random::<f64>());
            let backhaul_capacity = LINK_CLASSES[rng.random_range(0..LINK_CLASSES.len())];
            BaseStation {
                id,
                position: Point::new(x, y),
                coverage_radius,
                backhaul_capacity,
                series_ref: id as u64,
            }
        })
        .collect()
}

/// Undirected simple graph over stations `0..n`. Edges are stored as
/// `(i, j)` with `i < j`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl NetworkGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::invalid("self-loops are not allowed"));
            }
            if a >= n || b >= n {
                return Err(Error::invalid("edge endpoint out of range"));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid("duplicate edge"));
            }
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        count_components(self.n, self.edges.iter().copied()) <= 1
    }
}

/// Number of connected components of the graph on `n` nodes with the given edges.
pub(crate) fn count_components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> usize {
    let mut uf = UnionFind::new(n);
    for (a, b) in edges {
        uf.union(a, b);
    }
    uf.components
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    pub(crate) components: usize,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            components: n,
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so labels are stable
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
            self.components -= 1;
        }
    }
}

const MAX_TOPOLOGY_ATTEMPTS: u64 = 1000;

/// Generates a connected `degree`-regular graph on `n` nodes.
///
/// Starts from a circulant regular graph and randomises it with
/// degree-preserving double-edge swaps. If the result is disconnected the
/// construction is retried with the next sub-seed.
pub fn generate_regular_topology(n: usize, degree: usize, seed: u64) -> Result<NetworkGraph> {
    let infeasible = Error::InfeasibleTopology { n, degree };
    if n == 0 || n <= degree || (n * degree) % 2 == 1 {
        return Err(infeasible);
    }
    // no connected 0- or 1-regular graph beyond the trivial sizes
    if (degree == 0 && n > 1) || (degree == 1 && n > 2) {
        return Err(infeasible);
    }
    for attempt in 0..MAX_TOPOLOGY_ATTEMPTS {
        let mut rng = rng::rng_for(seed, rng::TOPOLOGY, attempt);
        let edges = randomised_circulant(n, degree, &mut rng);
        if count_components(n, edges.iter().copied()) == 1 {
            return NetworkGraph::from_edges(n, edges);
        }
    }
    Err(infeasible)
}

fn randomised_circulant(n: usize, degree: usize, rng: &mut SimRng) -> Vec<(usize, usize)> {
    let norm = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut edges = Vec::with_capacity(n * degree / 2);
    for k in 1..=degree / 2 {
        for i in 0..n {
            edges.push(norm(i, (i + k) % n));
        }
    }
    if degree % 2 == 1 {
        for i in 0..n / 2 {
            edges.push(norm(i, i + n / 2));
        }
    }
    let mut present: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    if edges.len() < 2 {
        return edges;
    }
    let swaps = 10 * edges.len();
    for _ in 0..swaps {
        let i = rng.random_range(0..edges.len());
        let j = rng.random_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (c, d) = edges[j];
        let (e1, e2) = if rng.random::<bool>() {
            ((a, c), (b, d))
        } else {
            ((a, d), (b, c))
        };
        if e1.0 == e1.1 || e2.0 == e2.1 {
            continue;
        }
        let (e1, e2) = (norm(e1.0, e1.1), norm(e2.0, e2.1));
        if e1 == e2 || present.contains(&e1) || present.contains(&e2) {
            continue;
        }
        present.remove(&edges[i]);
        present.remove(&edges[j]);
        present.insert(e1);
        present.insert(e2);
        edges[i] = e1;
        edges[j] = e2;
    }
    edges
}

/// Jaccard overlap (intersection over union) of the two coverage disks.
pub fn coverage_overlap(a: &BaseStation, b: &BaseStation) -> f64 {
    disk_jaccard(
        a.position.distance(&b.position),
        a.coverage_radius,
        b.coverage_radius,
    )
}

pub(crate) fn disk_jaccard(d: f64, r1: f64, r2: f64) -> f64 {
    let area1 = PI * r1 * r1;
    let area2 = PI * r2 * r2;
    let inter = if d >= r1 + r2 {
        0.0
    } else if d <= (r1 - r2).abs() {
        area1.min(area2)
    } else {
        let c1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
        let c2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
        let kite = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
        r1 * r1 * libm::acos(c1) + r2 * r2 * libm::acos(c2) - 0.5 * libm::sqrt(kite.max(0.0))
    };
    (inter / (area1 + area2 - inter)).clamp(0.0, 1.0)
}

/// Cosine similarity of the two value histograms on `bins` equal-width bins
/// spanning the joint range of both series.
pub fn traffic_similarity(s1: &[f64], s2: &[f64], bins: usize) -> Result<f64> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::EmptySeries);
    }
    if bins < 2 {
        return Err(Error::invalid("histogram needs at least 2 bins"));
    }
    let (lo, hi) = s1
        .iter()
        .chain(s2)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    if hi == lo {
        return Ok(1.0);
    }
    let h1 = histogram(s1, lo, hi, bins);
    let h2 = histogram(s2, lo, hi, bins);
    let dot: f64 = h1.iter().zip(&h2).map(|(a, b)| a * b).sum();
    let n1 = libm::sqrt(h1.iter().map(|a| a * a).sum::<f64>());
    let n2 = libm::sqrt(h2.iter().map(|a| a * a).sum::<f64>());
    Ok((dot / (n1 * n2)).clamp(0.0, 1.0))
}

fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    let width = hi - lo;
    for &v in values {
        let idx = (((v - lo) / width) * bins as f64) as usize;
        h[idx.min(bins - 1)] += 1.0;
    }
    h
}

pub fn backhaul_similarity(a: &BaseStation, b: &BaseStation) -> f64 {
    let (ca, cb) = (a.backhaul_capacity, b.backhaul_capacity);
    ca.min(cb) / ca.max(cb)
}

/// Dense symmetric `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn filled(n: usize, value: f64) -> Self {
        Self {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMatrices {
    /// Geographic distance, metres.
    pub g: SymMatrix,
    /// Backhaul similarity in (0, 1].
    pub k: SymMatrix,
    /// Coverage overlap in [0, 1].
    pub beta: SymMatrix,
    /// Traffic-distribution similarity in [0, 1].
    pub tau: SymMatrix,
}

impl AttributeMatrices {
    pub fn n(&self) -> usize {
        self.g.n()
    }
}

/// Computes all pairwise attributes. `series[i]` belongs to `stations[i]`;
/// rows and columns follow list order.
pub fn compute_attributes(
    stations: &[BaseStation],
    series: &[&[f64]],
    bins: usize,
) -> Result<AttributeMatrices> {
    if stations.len() != series.len() {
        return Err(Error::LengthMismatch {
            left: stations.len(),
            right: series.len(),
        });
    }
    let n = stations.len();
    let mut g = SymMatrix::filled(n, 0.0);
    let mut k = SymMatrix::filled(n, 1.0);
    let mut beta = SymMatrix::filled(n, 1.0);
    let mut tau = SymMatrix::filled(n, 1.0);
    for s in series {
        if s.is_empty() {
            return Err(Error::EmptySeries);
        }
    }
    for i in 0..n {
        stations[i].validate()?;
        for j in (i + 1)..n {
            let (a, b) = (&stations[i], &stations[j]);
            g.set(i, j, a.position.distance(&b.position));
            k.set(i, j, backhaul_similarity(a, b));
            beta.set(i, j, coverage_overlap(a, b));
            tau.set(i, j, traffic_similarity(series[i], series[j], bins)?);
        }
    }
    Ok(AttributeMatrices { g, k, beta, tau })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeWeights {
    pub g: f64,
    pub k: f64,
    pub beta: f64,
    pub tau: f64,
}

impl AttributeWeights {
    pub fn new(g: f64, k: f64, beta: f64, tau: f64) -> Result<Self> {
        let w = Self { g, k, beta, tau };
        w.validate()?;
        Ok(w)
    }

    pub fn equal() -> Self {
        Self {
            g: 1.0,
            k: 1.0,
            beta: 1.0,
            tau: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.g, self.k, self.beta, self.tau];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("attribute weights must be finite and non-negative"));
        }
        if all.iter().all(|w| *w == 0.0) {
            return Err(Error::invalid("at least one attribute weight must be positive"));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            g: self.g * factor,
            k: self.k * factor,
            beta: self.beta * factor,
            tau: self.tau * factor,
        }
    }
}

impl Default for AttributeWeights {
    fn default() -> Self {
        Self::equal()
    }
}

/// Lower end of the rescaled distance term when `normalize_distance` is on.
pub const DISTANCE_TERM_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiConfig {
    pub weights: AttributeWeights,
    /// Distances below this are clamped before inversion, metres.
    pub g_floor: f64,
    /// Rescale the inverse-distance term over all edges into
    /// `[DISTANCE_TERM_FLOOR, 1]` before weighting, so that equal weights
    /// balance term magnitudes.
    pub normalize_distance: bool,
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self {
            weights: AttributeWeights::equal(),
            g_floor: 1.0,
            normalize_distance: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub a: usize,
    pub b: usize,
    pub phi: f64,
}

/// Topology edges annotated with their relationship weight. Edge order
/// matches [`NetworkGraph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct RelationshipGraph {
    n: usize,
    edges: Vec<WeightedEdge>,
}

impl RelationshipGraph {
    /// Builds a graph directly from weighted edges; weights must be finite
    /// and positive.
    pub fn from_weighted_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let edges: Vec<(usize, usize, f64)> = edges.into_iter().collect();
        let topo = NetworkGraph::from_edges(n, edges.iter().map(|&(a, b, _)| (a, b)))?;
        let mut weighted: Vec<WeightedEdge> = edges
            .into_iter()
            .map(|(a, b, phi)| WeightedEdge {
                a: a.min(b),
                b: a.max(b),
                phi,
            })
            .collect();
        if weighted.iter().any(|e| !(e.phi.is_finite() && e.phi > 0.0)) {
            return Err(Error::invalid("edge weights must be finite and positive"));
        }
        weighted.sort_by_key(|e| (e.a, e.b));
        debug_assert_eq!(weighted.len(), topo.edges().len());
        Ok(Self { n, edges: weighted })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn phi(&self, a: usize, b: usize) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by_key(&key, |e| (e.a, e.b))
            .ok()
            .map(|i| self.edges[i].phi)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.phi).sum()
    }
}

/// Evaluates the relationship weight on every topology edge.
pub fn build_relationship_graph(
    topology: &NetworkGraph,
    attrs: &AttributeMatrices,
    cfg: &PhiConfig,
) -> Result<RelationshipGraph> {
    if topology.n() != attrs.n() {
        return Err(Error::DimensionMismatch {
            expected: topology.n(),
            got: attrs.n(),
        });
    }
    cfg.weights.validate()?;
    if !(cfg.g_floor > 0.0) {
        return Err(Error::invalid("g_floor must be positive"));
    }
    let inv_dist: Vec<f64> = topology
        .edges()
        .iter()
        .map(|&(a, b)| 1.0 / attrs.g.get(a, b).max(cfg.g_floor))
        .collect();
    let dist_term: Vec<f64> = if cfg.normalize_distance {
        let lo = inv_dist.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = inv_dist.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        inv_dist
            .iter()
            .map(|&t| {
                if hi > lo {
                    DISTANCE_TERM_FLOOR + (1.0 - DISTANCE_TERM_FLOOR) * (t - lo) / (hi - lo)
                } else {
                    1.0
                }
            })
            .collect()
    } else {
        inv_dist
    };
    let w = &cfg.weights;
    let mut edges = Vec::with_capacity(topology.edges().len());
    for (&(a, b), dt) in topology.edges().iter().zip(dist_term) {
        let phi = w.g * dt
            + w.k * attrs.k.get(a, b)
            + w.beta * attrs.beta.get(a, b)
            + w.tau * attrs.tau.get(a, b);
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::invalid(alloc::format!(
                "relationship weight on edge ({a}, {b}) is not positive: {phi}"
            )));
        }
        edges.push(WeightedEdge { a, b, phi });
    }
    Ok(RelationshipGraph {
        n: topology.n(),
        edges,
    })
}

/// Stations together with the topology connecting them.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub stations: Vec<BaseStation>,
    pub topology: NetworkGraph,
}

impl Network {
    pub fn new(stations: Vec<BaseStation>, topology: NetworkGraph) -> Result<Self> {
        validate_roster(&stations)?;
        if stations.len() != topology.n() {
            return Err(Error::DimensionMismatch {
                expected: stations.len(),
                got: topology.n(),
            });
        }
        Ok(Self { stations, topology })
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }
}
