//! Independent reference implementations used by the integration tests.
//! None of this shares code with the library beyond the `Graph` type.

#![allow(dead_code)]

use graphdiff_core::graphs::Graph;
use graphdiff_core::kernel::NoiseSchedule;
use graphdiff_core::rng::Rng;
use rand::Rng as _;

/// Node count, edge list and the orbit of each node.
type Graphlet = (usize, &'static [(usize, usize)], &'static [usize]);

/// Connected graphlets on 2–4 nodes.
const GRAPHLETS: [Graphlet; 9] = [
    (2, &[(0, 1)], &[0, 0]),
    (3, &[(0, 1), (1, 2)], &[1, 2, 1]),
    (3, &[(0, 1), (1, 2), (0, 2)], &[3, 3, 3]),
    (4, &[(0, 1), (1, 2), (2, 3)], &[4, 5, 5, 4]),
    (4, &[(0, 1), (0, 2), (0, 3)], &[7, 6, 6, 6]),
    (4, &[(0, 1), (1, 2), (2, 3), (3, 0)], &[8, 8, 8, 8]),
    (4, &[(0, 1), (1, 2), (0, 2), (2, 3)], &[10, 10, 11, 9]),
    (4, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], &[12, 12, 13, 13]),
    (4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], &[14, 14, 14, 14]),
];

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Orbit counts by matching every node subset of size 2..=4 against the
/// graphlet templates under all node permutations.
pub fn orbit_counts_oracle(g: &Graph) -> Vec<[u64; 15]> {
    let n = g.node_count();
    let mut counts = vec![[0u64; 15]; n];
    for k in 2..=4 {
        let perms = permutations(k);
        for subset in subsets(n, k) {
            'templates: for &(size, edges, orbits) in GRAPHLETS.iter().filter(|t| t.0 == k) {
                let mut template = vec![vec![false; size]; size];
                for &(a, b) in edges {
                    template[a][b] = true;
                    template[b][a] = true;
                }
                for perm in &perms {
                    let same = (0..k).all(|i| {
                        (0..k).all(|j| i == j || g.has_edge(subset[i], subset[j]) == template[perm[i]][perm[j]])
                    });
                    if same {
                        for i in 0..k {
                            counts[subset[i]][orbits[perm[i]]] += 1;
                        }
                        break 'templates;
                    }
                }
            }
        }
    }
    counts
}

/// Normalized Laplacian spectrum via nalgebra's symmetric eigensolver.
pub fn spectrum_oracle(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let deg: Vec<f64> = (0..n).map(|i| (0..n).filter(|&j| g.has_edge(i, j)).count() as f64).collect();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            if deg[i] > 0.0 { 1.0 } else { 0.0 }
        } else if g.has_edge(i, j) {
            -1.0 / (deg[i] * deg[j]).sqrt()
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Biased squared MMD by the textbook triple double-sum, in plain index order.
pub fn mmd_oracle<T>(a: &[T], b: &[T], k: impl Fn(&T, &T) -> f64) -> f64 {
    let (m, n) = (a.len() as f64, b.len() as f64);
    let mut xx = 0.0;
    for x in a {
        for y in a {
            xx += k(x, y);
        }
    }
    let mut yy = 0.0;
    for x in b {
        for y in b {
            yy += k(x, y);
        }
    }
    let mut xy = 0.0;
    for x in a {
        for y in b {
            xy += k(x, y);
        }
    }
    xx / (m * m) + yy / (n * n) - 2.0 * xy / (m * n)
}

/// `exp(-TV^2 / 2 sigma^2)` written out independently.
pub fn tv_kernel_oracle(h1: &[f64], h2: &[f64], sigma: f64) -> f64 {
    let mut l1 = 0.0;
    for i in 0..h1.len() {
        l1 += (h1[i] - h2[i]).abs();
    }
    let tv = l1 / 2.0;
    (-(tv * tv) / (2.0 * sigma * sigma)).exp()
}

pub fn random_graph(rng: &mut Rng, n: usize, p: f64) -> Graph {
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

/// Random normalized histogram with `bins` entries.
pub fn random_histogram(rng: &mut Rng, bins: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..bins).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

/// Random schedule: `T` in `[2, 500]`, arbitrary per-step values in
/// `[0, 0.5]` for a random prefix, then a constant plateau tail.
pub fn random_schedule(rng: &mut Rng) -> NoiseSchedule {
    let steps = rng.random_range(2..=500);
    let ramp = rng.random_range(1..=steps);
    let (p0, p1) = (rng.random_range(0.0..=0.5), rng.random_range(0.0..=0.5));
    let mut b0 = Vec::with_capacity(steps);
    let mut b1 = Vec::with_capacity(steps);
    for t in 0..steps {
        if t < ramp {
            b0.push(rng.random_range(0.0..=0.5));
            b1.push(rng.random_range(0.0..=0.5));
        } else {
            b0.push(p0);
            b1.push(p1);
        }
    }
    NoiseSchedule::new(b0, b1).unwrap()
}

/// One-step transition probability `P(x_t = to | x_{t-1} = from)`.
pub fn step_prob(schedule: &NoiseSchedule, t: usize, from: bool, to: bool) -> f64 {
    let one = if from { 1.0 - schedule.beta1(t) } else { schedule.beta0(t) };
    if to {
        one
    } else {
        1.0 - one
    }
}
