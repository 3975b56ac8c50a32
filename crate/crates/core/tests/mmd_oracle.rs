//! MMD against a brute-force double-sum oracle.

mod common;

use common::{mmd_oracle, random_graph, random_histogram, tv_kernel_oracle};
use graphdiff_core::graphs::{DatasetSource, Graph, GraphDataset};
use graphdiff_core::mmd::{gaussian_euclidean_kernel, gaussian_tv_kernel, mmd_sq, mmd_suite, MmdConfig};
use graphdiff_core::rng::rng_from_seed;
use rand::Rng as _;

fn tv(sigma: f64) -> impl Fn(&Vec<f64>, &Vec<f64>) -> graphdiff_core::Result<f64> + Sync {
    move |a, b| gaussian_tv_kernel(a, b, sigma)
}

#[test]
fn histogram_mmd_matches_the_oracle() {
    let mut rng = rng_from_seed(31);
    for _ in 0..2000 {
        let bins = rng.random_range(1..=12);
        let (m, n) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let sigma = rng.random_range(0.2..3.0);
        let a: Vec<Vec<f64>> = (0..m).map(|_| random_histogram(&mut rng, bins)).collect();
        let b: Vec<Vec<f64>> = (0..n).map(|_| random_histogram(&mut rng, bins)).collect();
        let ours = mmd_sq(&a, &b, tv(sigma)).unwrap();
        let oracle = mmd_oracle(&a, &b, |x, y| tv_kernel_oracle(x, y, sigma));
        assert!((ours - oracle).abs() < 1e-12, "{ours} vs {oracle}");
        assert_eq!(ours, mmd_sq(&b, &a, tv(sigma)).unwrap());
        assert!(mmd_sq(&a, &a, tv(sigma)).unwrap().abs() < 1e-12);
    }
}

#[test]
fn orbit_vector_mmd_matches_the_oracle() {
    let mut rng = rng_from_seed(32);
    for _ in 0..500 {
        let (m, n) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let vec15 = |rng: &mut graphdiff_core::rng::Rng| (0..15).map(|_| rng.random_range(0.0..40.0)).collect::<Vec<f64>>();
        let a: Vec<Vec<f64>> = (0..m).map(|_| vec15(&mut rng)).collect();
        let b: Vec<Vec<f64>> = (0..n).map(|_| vec15(&mut rng)).collect();
        let ours = mmd_sq(&a, &b, |x: &Vec<f64>, y: &Vec<f64>| gaussian_euclidean_kernel(x, y, 30.0)).unwrap();
        let oracle = mmd_oracle(&a, &b, |x, y| {
            let d2: f64 = x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum();
            (-d2 / 1800.0).exp()
        });
        assert!((ours - oracle).abs() < 1e-12);
        // The Euclidean Gaussian kernel is positive definite.
        assert!(ours >= -1e-12);
    }
}

#[test]
fn gaussian_tv_kernel_is_not_positive_definite() {
    // With this kernel the biased estimator can go below zero. Hand value:
    // 1 + e^{-1/2}/2 - e^{-9/32}/2 - e^{-1/32}.
    let a = vec![vec![0.0, 0.0, 1.0], vec![0.25, 0.75, 0.0]];
    let b = vec![vec![0.0, 0.75, 0.25], vec![0.25, 0.0, 0.75]];
    let expected = 1.0 + 0.5 * (-0.5f64).exp() - 0.5 * (-9.0f64 / 32.0).exp() - (-1.0f64 / 32.0).exp();
    let ours = mmd_sq(&a, &b, tv(1.0)).unwrap();
    assert!((ours - expected).abs() < 1e-12);
    assert!(ours < -0.04);
}

#[test]
fn suite_on_identical_sets_is_zero_and_detects_density_gaps() {
    let mut rng = rng_from_seed(33);
    let src = DatasetSource::Other { description: "mmd test".into() };
    let graphs: Vec<Graph> = (0..6).map(|_| random_graph(&mut rng, 9, 0.4)).collect();
    let d = GraphDataset::new(graphs, src.clone()).unwrap();
    let same = mmd_suite(&d, &d, &MmdConfig::default()).unwrap();
    assert!(same.values().iter().all(|v| v.abs() < 1e-12), "{same:?}");

    let full = GraphDataset::new(vec![Graph::complete(6); 3], src.clone()).unwrap();
    let empty = GraphDataset::new(vec![Graph::empty(6); 3], src).unwrap();
    let gap = mmd_suite(&full, &empty, &MmdConfig::default()).unwrap();
    assert!(gap.degree > 0.0);
    let swapped = mmd_suite(&empty, &full, &MmdConfig::default()).unwrap();
    assert_eq!(gap, swapped);
}

#[test]
fn shrinking_tv_shrinks_singleton_mmd() {
    let base = vec![vec![1.0, 0.0]];
    let mut last = f64::INFINITY;
    for k in (0..=10).rev() {
        let shift = k as f64 / 10.0;
        let other = vec![vec![1.0 - shift, shift]];
        let v = mmd_sq(&base, &other, tv(1.0)).unwrap();
        assert!(v < last || (k == 0 && v == 0.0));
        last = v;
    }
}
