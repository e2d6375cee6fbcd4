//! Shared fixtures for the benchmarks.

use qaoa_core::graph::enumerate_connected_graphs;
use qaoa_core::Graph;

/// The first connected 5-vertex graph with 5 edges.
pub fn five_edge_graph() -> Graph {
    enumerate_connected_graphs(5)
        .expect("n = 5 is supported")
        .into_iter()
        .find(|g| g.n_edges() == 5)
        .expect("5-edge graphs exist")
}

/// Deterministic angles for `depth` layers.
pub fn angles(depth: usize) -> Vec<f64> {
    (0..2 * depth).map(|i| 0.1 + 0.37 * i as f64).collect()
}
