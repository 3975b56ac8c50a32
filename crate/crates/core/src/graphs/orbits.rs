//! Graphlet orbit counts for connected induced subgraphs on 2 to 4 nodes.
//!
//! Orbit numbering (the usual ORCA convention):
//!
//! | graphlet            | orbits                                   |
//! |---------------------|------------------------------------------|
//! | edge                | 0                                        |
//! | path on 3 nodes     | 1 end, 2 middle                          |
//! | triangle            | 3                                        |
//! | path on 4 nodes     | 4 end, 5 inner                           |
//! | star (claw)         | 6 leaf, 7 centre                         |
//! | 4-cycle             | 8                                        |
//! | paw (tailed triangle)| 9 tail, 10 triangle degree 2, 11 hub    |
//! | diamond             | 12 degree 2, 13 degree 3                 |
//! | K4                  | 14                                       |

use super::Graph;

pub const ORBIT_COUNT: usize = 15;

/// Orbit of a node with induced degree `deg` inside a connected 4-node
/// graphlet with `edges` edges and maximum degree `max_deg`.
fn four_node_orbit(edges: usize, max_deg: usize, deg: usize) -> usize {
    match (edges, max_deg) {
        (3, 2) => [0, 4, 5][deg],
        (3, 3) => [0, 6, 0, 7][deg],
        (4, 2) => 8,
        (4, 3) => [0, 9, 10, 11][deg],
        (5, _) => [0, 0, 12, 13][deg],
        (6, _) => 14,
        _ => unreachable!("not a connected 4-node graphlet"),
    }
}

/// Per-node orbit counts by enumerating every node subset of size 2 to 4.
/// `O(n^4)`.
pub fn orbit_counts(g: &Graph) -> Vec<[u64; ORBIT_COUNT]> {
    let n = g.node_count();
    let adj = g.adjacency();
    let e = |a: usize, b: usize| adj[a * n + b] as usize;
    let mut counts = vec![[0u64; ORBIT_COUNT]; n];

    for (i, j) in g.edges() {
        counts[i][0] += 1;
        counts[j][0] += 1;
    }

    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (ij, ik, jk) = (e(i, j), e(i, k), e(j, k));
                match ij + ik + jk {
                    3 => {
                        for v in [i, j, k] {
                            counts[v][3] += 1;
                        }
                    }
                    2 => {
                        let nodes = [(i, ij + ik), (j, ij + jk), (k, ik + jk)];
                        for (v, d) in nodes {
                            counts[v][if d == 2 { 2 } else { 1 }] += 1;
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let quad = [i, j, k, l];
                    let mut deg = [0usize; 4];
                    let mut edges = 0;
                    for a in 0..4 {
                        for b in a + 1..4 {
                            if e(quad[a], quad[b]) == 1 {
                                deg[a] += 1;
                                deg[b] += 1;
                                edges += 1;
                            }
                        }
                    }
                    // With 3 edges, a zero-degree node means triangle + isolated node.
                    if edges < 3 || deg.contains(&0) {
                        continue;
                    }
                    let max_deg = *deg.iter().max().unwrap();
                    for (v, d) in quad.into_iter().zip(deg) {
                        counts[v][four_node_orbit(edges, max_deg, d)] += 1;
                    }
                }
            }
        }
    }
    counts
}
