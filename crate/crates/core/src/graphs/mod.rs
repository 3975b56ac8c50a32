//! Simple undirected graphs stored as upper-triangular edge bits, plus the
//! benchmark generators and per-graph statistics used for evaluation.

mod eigen;
mod generators;
mod io;
mod orbits;
mod stats;

pub use eigen::symmetric_eigenvalues;
pub use generators::{er_sample, gen_community_small, gen_sbm, DatasetSpec};
pub use io::{read_dataset, write_dataset};
pub use orbits::{orbit_counts, ORBIT_COUNT};
pub use stats::{
    clustering_coeffs, clustering_histogram, degree_histogram, laplacian_spectrum, spectrum_histogram,
    GraphStats, CLUSTERING_BINS, SPECTRUM_BINS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of unordered node pairs, `C(n, 2)`.
pub const fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of pair `(i, j)`, `i < j`, in the row-major upper triangle.
#[inline]
pub const fn pair_index(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    bits: Vec<bool>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1, "graph needs at least one node");
        Self { n, bits: vec![false; pair_count(n)] }
    }

    pub fn complete(n: usize) -> Self {
        assert!(n >= 1, "graph needs at least one node");
        Self { n, bits: vec![true; pair_count(n)] }
    }

    pub fn from_bits(n: usize, bits: Vec<bool>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "graph needs at least one node"));
        }
        if bits.len() != pair_count(n) {
            return Err(Error::ShapeMismatch { expected: pair_count(n), got: bits.len() });
        }
        Ok(Self { n, bits })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::from_bits(n, vec![false; pair_count(n)])?;
        for &(a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::invalid("edges", format!("({a}, {b}) is not a pair of distinct nodes below {n}")));
            }
            g.set_edge(a, b, true);
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    fn index(&self, a: usize, b: usize) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        debug_assert!(i != j && j < self.n);
        pair_index(self.n, i, j)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.bits[self.index(a, b)]
    }

    pub fn set_edge(&mut self, a: usize, b: usize, present: bool) {
        let idx = self.index(a, b);
        self.bits[idx] = present;
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Edges `(i, j)`, `i < j`, in bit-index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.bits[pair_index(n, i, j)])
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for (i, j) in self.edges() {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Dense symmetric adjacency, row-major.
    pub fn adjacency(&self) -> Vec<bool> {
        let n = self.n;
        let mut adj = vec![false; n * n];
        for (i, j) in self.edges() {
            adj[i * n + j] = true;
            adj[j * n + i] = true;
        }
        adj
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.n];
        for (i, j) in self.edges() {
            nbrs[i].push(j);
            nbrs[j].push(i);
        }
        nbrs
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    Generated { spec: DatasetSpec, seed: u64 },
    File { path: String },
    Sampled { prior_p: f64 },
    Other { description: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    pub graphs: Vec<Graph>,
    pub source: DatasetSource,
}

impl GraphDataset {
    pub fn new(graphs: Vec<Graph>, source: DatasetSource) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::invalid("graphs", "dataset is empty"));
        }
        Ok(Self { graphs, source })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// The shared node count, or `None` when sizes differ.
    pub fn uniform_node_count(&self) -> Option<usize> {
        let n = self.graphs.first()?.node_count();
        self.graphs.iter().all(|g| g.node_count() == n).then_some(n)
    }

    /// Total edges over total node pairs, pooled across the dataset.
    pub fn empirical_edge_prob(&self) -> f64 {
        let (edges, pairs) = self
            .graphs
            .iter()
            .fold((0usize, 0usize), |(e, p), g| (e + g.edge_count(), p + pair_count(g.node_count())));
        if pairs == 0 {
            0.0
        } else {
            edges as f64 / pairs as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_enumerates_upper_triangle() {
        for n in 1..9 {
            let mut expected = 0;
            for i in 0..n {
                for j in i + 1..n {
                    assert_eq!(pair_index(n, i, j), expected);
                    expected += 1;
                }
            }
            assert_eq!(expected, pair_count(n));
        }
    }

    #[test]
    fn edges_round_trip_through_bits() {
        let g = Graph::from_edges(5, &[(3, 1), (0, 4), (2, 3)]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 4), (1, 3), (2, 3)]);
        assert!(g.has_edge(1, 3) && g.has_edge(3, 1));
        assert!(!g.has_edge(2, 2));
        assert_eq!(g.degrees(), vec![1, 1, 1, 2, 1]);
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
        assert!(Graph::from_bits(4, vec![false; 5]).is_err());
    }

    #[test]
    fn empirical_edge_prob_examples() {
        let k3 = Graph::complete(3);
        let src = DatasetSource::Other { description: "test".into() };
        let one = GraphDataset::new(vec![k3.clone()], src.clone()).unwrap();
        assert_eq!(one.empirical_edge_prob(), 1.0);
        let empty = GraphDataset::new(vec![Graph::empty(4)], src.clone()).unwrap();
        assert_eq!(empty.empirical_edge_prob(), 0.0);
        let mixed = GraphDataset::new(vec![k3, Graph::empty(3)], src.clone()).unwrap();
        assert_eq!(mixed.empirical_edge_prob(), 0.5);
        assert!(GraphDataset::new(vec![], src).is_err());
    }
}
