//! Maximum mean discrepancy between sets of per-graph statistics.
//!
//! Histogram statistics (degree, clustering, spectrum) are compared with a
//! Gaussian kernel on total-variation distance; mean orbit-count vectors use a
//! Gaussian kernel on Euclidean distance. All values are squared MMD from the
//! biased (V-statistic) estimator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{GraphDataset, GraphStats};

fn default_sigma() -> f64 {
    1.0
}

fn default_orbit_sigma() -> f64 {
    30.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmdConfig {
    /// Bandwidth of the Gaussian-TV kernel on histograms.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Bandwidth of the Gaussian-Euclidean kernel on mean orbit counts.
    #[serde(default = "default_orbit_sigma")]
    pub orbit_sigma: f64,
}

impl Default for MmdConfig {
    fn default() -> Self {
        Self { sigma: default_sigma(), orbit_sigma: default_orbit_sigma() }
    }
}

impl MmdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma.is_nan() || self.sigma <= 0.0 {
            return Err(Error::Config(format!("eval.mmd.sigma: {} must be positive", self.sigma)));
        }
        if self.orbit_sigma.is_nan() || self.orbit_sigma <= 0.0 {
            return Err(Error::Config(format!("eval.mmd.orbit_sigma: {} must be positive", self.orbit_sigma)));
        }
        Ok(())
    }
}

/// Squared MMD per statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmdResult {
    pub degree: f64,
    pub clustering: f64,
    pub spectrum: f64,
    pub orbit: f64,
}

impl MmdResult {
    pub const CSV_HEADER: &'static str = "degree,clustering,spectrum,orbit";

    pub fn to_csv_record(&self) -> String {
        format!("{},{},{},{}", self.degree, self.clustering, self.spectrum, self.orbit)
    }

    pub fn values(&self) -> [f64; 4] {
        [self.degree, self.clustering, self.spectrum, self.orbit]
    }
}

/// Half the L1 distance between two normalized histograms.
pub fn tv_distance(h1: &[f64], h2: &[f64]) -> Result<f64> {
    if h1.len() != h2.len() {
        return Err(Error::ShapeMismatch { expected: h1.len(), got: h2.len() });
    }
    for h in [h1, h2] {
        let total: f64 = h.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::invalid("histogram", format!("mass {total} is not 1")));
        }
    }
    Ok(0.5 * h1.iter().zip(h2).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `exp(-TV(h1, h2)^2 / (2 sigma^2))`.
pub fn gaussian_tv_kernel(h1: &[f64], h2: &[f64], sigma: f64) -> Result<f64> {
    let d = tv_distance(h1, h2)?;
    Ok((-d * d / (2.0 * sigma * sigma)).exp())
}

/// `exp(-|a - b|^2 / (2 sigma^2))`.
pub fn gaussian_euclidean_kernel(a: &[f64], b: &[f64], sigma: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch { expected: a.len(), got: b.len() });
    }
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((-d2 / (2.0 * sigma * sigma)).exp())
}

/// Mean of `k(x, y)` over all pairs, summed in sorted order so the result
/// does not depend on which set comes first or how work was scheduled.
fn mean_kernel<T, K>(xs: &[T], ys: &[T], kernel: &K) -> Result<f64>
where
    T: Sync,
    K: Fn(&T, &T) -> Result<f64> + Sync,
{
    let mut values = xs
        .par_iter()
        .flat_map_iter(|x| ys.iter().map(move |y| kernel(x, y)))
        .collect::<Result<Vec<f64>>>()?;
    values.sort_by(f64::total_cmp);
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Biased squared MMD, `mean k(A, A) + mean k(B, B) - 2 mean k(A, B)`.
pub fn mmd_sq<T, K>(set_a: &[T], set_b: &[T], kernel: K) -> Result<f64>
where
    T: Sync,
    K: Fn(&T, &T) -> Result<f64> + Sync,
{
    if set_a.is_empty() || set_b.is_empty() {
        return Err(Error::invalid("set", "MMD needs two non-empty sample sets"));
    }
    let aa = mean_kernel(set_a, set_a, &kernel)?;
    let bb = mean_kernel(set_b, set_b, &kernel)?;
    let ab = mean_kernel(set_a, set_b, &kernel)?;
    Ok((aa + bb) - 2.0 * ab)
}

fn dataset_stats(ds: &GraphDataset, degree_bins: usize) -> Result<Vec<GraphStats>> {
    ds.graphs.par_iter().map(|g| GraphStats::compute(g, degree_bins)).collect()
}

/// Degree, clustering, spectrum and orbit MMD between two graph sets.
pub fn mmd_suite(generated: &GraphDataset, reference: &GraphDataset, cfg: &MmdConfig) -> Result<MmdResult> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::invalid("dataset", "MMD needs two non-empty datasets"));
    }
    let max_degree = generated
        .graphs
        .iter()
        .chain(&reference.graphs)
        .flat_map(|g| g.degrees())
        .max()
        .unwrap_or(0);
    let bins = max_degree + 1;
    let gen = dataset_stats(generated, bins)?;
    let reference = dataset_stats(reference, bins)?;

    let hist = |get: fn(&GraphStats) -> &[f64]| {
        let sigma = cfg.sigma;
        mmd_sq(&gen, &reference, move |a: &GraphStats, b: &GraphStats| gaussian_tv_kernel(get(a), get(b), sigma))
    };
    Ok(MmdResult {
        degree: hist(|s| &s.degree_hist)?,
        clustering: hist(|s| &s.clustering_hist)?,
        spectrum: hist(|s| &s.spectrum_hist)?,
        orbit: mmd_sq(&gen, &reference, |a: &GraphStats, b: &GraphStats| {
            gaussian_euclidean_kernel(&a.orbit_means, &b.orbit_means, cfg.orbit_sigma)
        })?,
    })
}
