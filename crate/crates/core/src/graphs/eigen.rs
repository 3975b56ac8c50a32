use crate::error::{Error, Result};

const OFF_DIAGONAL_TOL: f64 = 1e-10;

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j] * a[i * n + j];
            }
        }
    }
    sum.sqrt()
}

/// Eigenvalues of a dense symmetric `n x n` matrix (row-major), ascending.
///
/// Cyclic Jacobi: sweep every off-diagonal pair, zeroing it with a plane
/// rotation, until the off-diagonal Frobenius norm drops below 1e-10.
/// Gives up after `100 n^2` rotations.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize) -> Result<Vec<f64>> {
    if matrix.len() != n * n {
        return Err(Error::ShapeMismatch { expected: n * n, got: matrix.len() });
    }
    let mut a = matrix.to_vec();
    let max_rotations = 100 * n * n;
    let mut rotations = 0;
    let mut sweeps = 0;

    loop {
        let residual = off_diagonal_norm(&a, n);
        if residual < OFF_DIAGONAL_TOL {
            break;
        }
        if rotations >= max_rotations {
            return Err(Error::NoConvergence { sweeps, residual });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                rotations += 1;
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = c * arp - s * arq;
                    let new_rq = c * arq + s * arp;
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}
