//! Fixtures shared by the benchmarks.

use graphdiff_core::graphs::{DatasetSpec, Graph};
use graphdiff_core::rng::rng_from_seed;

/// `count` community graphs with `n` nodes, generated from a fixed seed.
pub fn community_graphs(n: usize, count: usize, seed: u64) -> Vec<Graph> {
    let spec = DatasetSpec::CommunitySmall { nodes: [n, n], p_intra: 0.7, inter_edge_rate: 0.05 };
    spec.generate(count, &mut rng_from_seed(seed)).expect("valid community spec")
}
