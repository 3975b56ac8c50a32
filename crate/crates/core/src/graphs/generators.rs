use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{pair_count, Graph};
use crate::error::{Error, Result};

/// Erdős–Rényi `G(n, p)`.
pub fn er_sample<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let bits = (0..pair_count(n)).map(|_| rng.random::<f64>() < p).collect();
    Graph::from_bits(n, bits).expect("bit count matches by construction")
}

/// Two equal `G(n/2, p_intra)` communities on nodes `0..n/2` and `n/2..n`,
/// joined by `ceil(inter_edge_rate * n)` distinct cross edges chosen uniformly.
pub fn gen_community_small<R: Rng + ?Sized>(
    n_total: usize,
    p_intra: f64,
    inter_edge_rate: f64,
    rng: &mut R,
) -> Result<Graph> {
    if n_total < 4 || n_total % 2 != 0 {
        return Err(Error::invalid("n_total", format!("{n_total} must be even and at least 4")));
    }
    if inter_edge_rate < 0.0 {
        return Err(Error::invalid("inter_edge_rate", "must be non-negative"));
    }
    let half = n_total / 2;
    // The epsilon keeps products such as 0.05 * 20 from rounding up past an integer.
    let inter = (inter_edge_rate * n_total as f64 - 1e-9).ceil().max(0.0) as usize;
    if inter > half * half {
        return Err(Error::invalid(
            "inter_edge_rate",
            format!("{inter} cross edges requested, only {} pairs exist", half * half),
        ));
    }

    let mut g = Graph::empty(n_total);
    for offset in [0, half] {
        for i in 0..half {
            for j in i + 1..half {
                if rng.random::<f64>() < p_intra {
                    g.set_edge(offset + i, offset + j, true);
                }
            }
        }
    }
    for k in index::sample(rng, half * half, inter) {
        g.set_edge(k / half, half + k % half, true);
    }
    Ok(g)
}

/// Stochastic block model with contiguous blocks.
pub fn gen_sbm<R: Rng + ?Sized>(block_sizes: &[usize], p_intra: f64, p_inter: f64, rng: &mut R) -> Result<Graph> {
    if block_sizes.is_empty() || block_sizes.contains(&0) {
        return Err(Error::invalid("block_sizes", "need at least one block, all of size >= 1"));
    }
    let block_of: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat(b).take(size))
        .collect();
    let n = block_of.len();
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            let p = if block_of[i] == block_of[j] { p_intra } else { p_inter };
            if rng.random::<f64>() < p {
                g.set_edge(i, j, true);
            }
        }
    }
    Ok(g)
}

fn default_community_nodes() -> [usize; 2] {
    [12, 20]
}
fn default_community_p_intra() -> f64 {
    0.7
}
fn default_inter_edge_rate() -> f64 {
    0.05
}
fn default_sbm_blocks() -> usize {
    2
}
fn default_sbm_block_size() -> [usize; 2] {
    [10, 15]
}
fn default_sbm_p_intra() -> f64 {
    0.3
}
fn default_sbm_p_inter() -> f64 {
    0.05
}
fn default_er_n() -> usize {
    12
}
fn default_er_p() -> f64 {
    0.5
}

/// Benchmark dataset family and its parameters.
///
/// Node-count ranges are inclusive `[min, max]`; equal bounds give a fixed size,
/// which is what model training requires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    CommunitySmall {
        #[serde(default = "default_community_nodes")]
        nodes: [usize; 2],
        #[serde(default = "default_community_p_intra")]
        p_intra: f64,
        #[serde(default = "default_inter_edge_rate")]
        inter_edge_rate: f64,
    },
    Sbm {
        #[serde(default = "default_sbm_blocks")]
        blocks: usize,
        #[serde(default = "default_sbm_block_size")]
        block_size: [usize; 2],
        #[serde(default = "default_sbm_p_intra")]
        p_intra: f64,
        #[serde(default = "default_sbm_p_inter")]
        p_inter: f64,
    },
    ErdosRenyi {
        #[serde(default = "default_er_n")]
        n: usize,
        #[serde(default = "default_er_p")]
        p: f64,
    },
}

impl DatasetSpec {
    pub fn community_small() -> Self {
        DatasetSpec::CommunitySmall {
            nodes: default_community_nodes(),
            p_intra: default_community_p_intra(),
            inter_edge_rate: default_inter_edge_rate(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &'static str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("dataset.{name}: {p} outside [0, 1]")))
            }
        };
        match *self {
            DatasetSpec::CommunitySmall { nodes, p_intra, inter_edge_rate } => {
                if nodes[0] > nodes[1] || nodes[0] < 4 || nodes[0] % 2 != 0 || nodes[1] % 2 != 0 {
                    return Err(Error::Config(format!(
                        "dataset.nodes: {nodes:?} must be an even range with minimum at least 4"
                    )));
                }
                if inter_edge_rate < 0.0 {
                    return Err(Error::Config("dataset.inter_edge_rate: must be non-negative".into()));
                }
                let half = nodes[0] / 2;
                if (inter_edge_rate * nodes[0] as f64 - 1e-9).ceil() > (half * half) as f64 {
                    return Err(Error::Config("dataset.inter_edge_rate: more cross edges than node pairs".into()));
                }
                prob("p_intra", p_intra)
            }
            DatasetSpec::Sbm { blocks, block_size, p_intra, p_inter } => {
                if blocks == 0 {
                    return Err(Error::Config("dataset.blocks: need at least one block".into()));
                }
                if block_size[0] == 0 || block_size[0] > block_size[1] {
                    return Err(Error::Config(format!("dataset.block_size: invalid range {block_size:?}")));
                }
                prob("p_intra", p_intra)?;
                prob("p_inter", p_inter)
            }
            DatasetSpec::ErdosRenyi { n, p } => {
                if n == 0 {
                    return Err(Error::Config("dataset.n: need at least one node".into()));
                }
                prob("p", p)
            }
        }
    }

    /// Node count when every generated graph has the same size.
    pub fn fixed_node_count(&self) -> Option<usize> {
        match *self {
            DatasetSpec::CommunitySmall { nodes, .. } => (nodes[0] == nodes[1]).then_some(nodes[0]),
            DatasetSpec::Sbm { blocks, block_size, .. } => (block_size[0] == block_size[1]).then_some(blocks * block_size[0]),
            DatasetSpec::ErdosRenyi { n, .. } => Some(n),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graph> {
        match *self {
            DatasetSpec::CommunitySmall { nodes, p_intra, inter_edge_rate } => {
                let n = 2 * rng.random_range(nodes[0] / 2..=nodes[1] / 2);
                gen_community_small(n, p_intra, inter_edge_rate, rng)
            }
            DatasetSpec::Sbm { blocks, block_size, p_intra, p_inter } => {
                let sizes: Vec<usize> = (0..blocks).map(|_| rng.random_range(block_size[0]..=block_size[1])).collect();
                gen_sbm(&sizes, p_intra, p_inter, rng)
            }
            DatasetSpec::ErdosRenyi { n, p } => Ok(er_sample(n, p, rng)),
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<Graph>> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}
