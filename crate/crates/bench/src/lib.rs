//! Shared workloads for the benchmarks.

use spa_core::{generate, CandidateSource, GrownGraph, InfluenceEntry, InfluenceIndex, ModelParams, TorusPoint, TrajectoryPolicy};

/// Reference parameters (`p = 0.7`, `A1 = 1`, mean out-degree 10, 2-d L∞ torus).
pub fn reference_params(n: usize) -> ModelParams {
    ModelParams { n, ..ModelParams::default() }
}

pub fn reference_graph(n: usize) -> GrownGraph {
    generate(&reference_params(n), TrajectoryPolicy::None).expect("reference parameters are valid")
}

/// An index holding every vertex of `graph` at its final degree, at time `n`.
pub fn loaded_index(graph: &GrownGraph) -> InfluenceIndex {
    let mut index = InfluenceIndex::new(graph.params());
    for v in 0..graph.n() {
        index.advance(v as u64 + 1);
        let position = TorusPoint::new(graph.position(v).expect("generated graphs keep positions").to_vec())
            .expect("positions lie in the unit cube");
        index
            .insert(InfluenceEntry { vertex: v, position, in_degree: graph.in_degree(v) })
            .expect("fresh vertex");
    }
    index
}

/// Deterministic probe points spread over the torus.
pub fn probe_points(count: usize, dimension: usize) -> Vec<Vec<f64>> {
    let key = spa_core::rng::StreamKey::new(0xbe7c);
    (0..count as u64)
        .map(|i| (0..dimension).map(|axis| key.position(i + 1, axis)).collect())
        .collect()
}
