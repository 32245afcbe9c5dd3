use alloc::vec;

use super::ClusterAssignment;
use crate::error::{Error, Result};
use crate::topology::RelationshipGraph;

/// Newman modularity `Q = sum_c [ W_c / W - (S_c / 2W)^2 ]`, where `W` is the
/// total edge mass, `W_c` the mass inside cluster `c` and `S_c` the summed
/// degree of its members. With `weighted = false` every edge has mass 1.
pub fn modularity(
    graph: &RelationshipGraph,
    assignment: &ClusterAssignment,
    weighted: bool,
) -> Result<f64> {
    if assignment.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: assignment.len(),
        });
    }
    let mass = |phi: f64| if weighted { phi } else { 1.0 };
    let total: f64 = graph.edges().iter().map(|e| mass(e.phi)).sum();
    if graph.edges().is_empty() || total <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let c = assignment.num_clusters();
    let mut inside = vec![0.0; c];
    let mut degree = vec![0.0; c];
    for e in graph.edges() {
        let (ca, cb) = (assignment.cluster_of(e.a), assignment.cluster_of(e.b));
        let w = mass(e.phi);
        degree[ca] += w;
        degree[cb] += w;
        if ca == cb {
            inside[ca] += w;
        }
    }
    Ok(inside
        .iter()
        .zip(&degree)
        .map(|(&wc, &sc)| {
            let share = sc / (2.0 * total);
            wc / total - share * share
        })
        .sum())
}
