use super::eigen::symmetric_eigenvalues;
use super::orbits::{orbit_counts, ORBIT_COUNT};
use super::Graph;
use crate::error::Result;

pub const CLUSTERING_BINS: usize = 100;
pub const SPECTRUM_BINS: usize = 200;

/// Normalized histogram of `values` over `bins` equal cells spanning `[lo, hi]`.
/// Values at or past either edge land in the outermost cell.
fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    if values.is_empty() {
        return h;
    }
    let width = (hi - lo) / bins as f64;
    for &v in values {
        let idx = ((v - lo) / width).floor();
        let idx = if idx < 0.0 { 0 } else { (idx as usize).min(bins - 1) };
        h[idx] += 1.0;
    }
    let total = values.len() as f64;
    h.iter_mut().for_each(|x| *x /= total);
    h
}

/// Fraction of nodes with each degree `0..bins`; larger degrees fall in the last bin.
pub fn degree_histogram(g: &Graph, bins: usize) -> Vec<f64> {
    assert!(bins >= 1);
    let mut h = vec![0.0; bins];
    for d in g.degrees() {
        h[d.min(bins - 1)] += 1.0;
    }
    let n = g.node_count() as f64;
    h.iter_mut().for_each(|x| *x /= n);
    h
}

/// Local clustering coefficient per node; 0 for nodes of degree below 2.
pub fn clustering_coeffs(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let adj = g.adjacency();
    let nbrs = g.neighbors();
    (0..n)
        .map(|v| {
            let nv = &nbrs[v];
            let d = nv.len();
            if d < 2 {
                return 0.0;
            }
            let mut closed = 0usize;
            for (a, &x) in nv.iter().enumerate() {
                for &y in &nv[a + 1..] {
                    if adj[x * n + y] {
                        closed += 1;
                    }
                }
            }
            closed as f64 / (d * (d - 1) / 2) as f64
        })
        .collect()
}

pub fn clustering_histogram(g: &Graph) -> Vec<f64> {
    histogram(&clustering_coeffs(g), 0.0, 1.0, CLUSTERING_BINS)
}

/// Normalized Laplacian `I - D^{-1/2} A D^{-1/2}` of `g`, dense row-major.
/// Isolated nodes get an all-zero row.
pub(crate) fn normalized_laplacian(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let deg = g.degrees();
    let mut l = vec![0.0; n * n];
    for (i, &d) in deg.iter().enumerate() {
        if d > 0 {
            l[i * n + i] = 1.0;
        }
    }
    for (i, j) in g.edges() {
        let w = -1.0 / ((deg[i] * deg[j]) as f64).sqrt();
        l[i * n + j] = w;
        l[j * n + i] = w;
    }
    l
}

/// Ascending eigenvalues of the normalized Laplacian.
pub fn laplacian_spectrum(g: &Graph) -> Result<Vec<f64>> {
    symmetric_eigenvalues(&normalized_laplacian(g), g.node_count())
}

pub fn spectrum_histogram(g: &Graph) -> Result<Vec<f64>> {
    Ok(histogram(&laplacian_spectrum(g)?, 0.0, 2.0, SPECTRUM_BINS))
}

/// Per-graph descriptors compared by the MMD suite.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub degree_hist: Vec<f64>,
    pub clustering_hist: Vec<f64>,
    pub spectrum_hist: Vec<f64>,
    pub orbit_means: [f64; ORBIT_COUNT],
}

impl GraphStats {
    pub fn compute(g: &Graph, degree_bins: usize) -> Result<Self> {
        let counts = orbit_counts(g);
        let mut orbit_means = [0.0; ORBIT_COUNT];
        for node in &counts {
            for (m, &c) in orbit_means.iter_mut().zip(node) {
                *m += c as f64;
            }
        }
        let n = g.node_count() as f64;
        orbit_means.iter_mut().for_each(|m| *m /= n);

        Ok(Self {
            degree_hist: degree_histogram(g, degree_bins),
            clustering_hist: clustering_histogram(g),
            spectrum_hist: spectrum_histogram(g)?,
            orbit_means,
        })
    }
}
