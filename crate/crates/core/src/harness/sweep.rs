//! The prior sweep and the prior-sample MMD experiment.
//!
//! Each `(p, seed)` cell draws every random number from
//! `cell_seed(global_seed, p, seed)`, so adding grid points or seeds never
//! changes existing cells, and results do not depend on the worker count.

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use crate::diffusion::{sample_graphs, train, TrainConfig};
use crate::error::{Error, Result};
use crate::graphs::{er_sample, DatasetSource, GraphDataset};
use crate::kernel::{build_schedule, KernelTables};
use crate::mmd::{mmd_suite, MmdResult};
use crate::model::DenoiserConfig;
use crate::rng::{derive_seed, rng_from_seed};

pub const SWEEP_HEADER: &str = "p,seed,mmd_degree,mmd_clustering,mmd_spectrum,mmd_orbit,early_loss,wall_time_s,error";
pub const PRIOR_MMD_HEADER: &str = "p,seed,mmd_degree,mmd_clustering,mmd_spectrum,mmd_orbit,error";

const DATASET_STREAM: u64 = 0x6461_7461;
const SPLIT_STREAM: u64 = 0x7370_6c69;
const PRIOR_STREAM: u64 = 0x7072_696f;

/// Root seed of the `(p, seed)` sweep cell.
pub fn cell_seed(global_seed: u64, p: f64, seed: u64) -> u64 {
    derive_seed(global_seed, &[p.to_bits(), seed])
}

/// The generated dataset and its seeded 50/50 split into a training half and
/// an MMD-reference half.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub full: GraphDataset,
    pub train: GraphDataset,
    pub reference: GraphDataset,
    pub dataset_seed: u64,
}

impl PreparedData {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let dataset_seed = cfg.dataset.seed.unwrap_or_else(|| derive_seed(cfg.seed, &[DATASET_STREAM]));
        let spec = cfg.dataset.generator.clone();
        let graphs = spec.generate(cfg.dataset.count, &mut rng_from_seed(dataset_seed))?;
        let full = GraphDataset::new(graphs, DatasetSource::Generated { spec, seed: dataset_seed })?;
        Self::split(full, derive_seed(cfg.seed, &[SPLIT_STREAM]), dataset_seed)
    }

    /// Shuffles with `split_seed`; the first `len / 2` graphs become the
    /// reference half and the rest the training half.
    pub fn split(full: GraphDataset, split_seed: u64, dataset_seed: u64) -> Result<Self> {
        if full.len() < 2 {
            return Err(Error::Config("dataset.count: need at least 2 graphs to split".into()));
        }
        let mut order: Vec<usize> = (0..full.len()).collect();
        order.shuffle(&mut rng_from_seed(split_seed));
        let half = full.len() / 2;
        let pick = |idx: &[usize]| idx.iter().map(|&i| full.graphs[i].clone()).collect::<Vec<_>>();
        let reference = GraphDataset::new(pick(&order[..half]), full.source.clone())?;
        let train = GraphDataset::new(pick(&order[half..]), full.source.clone())?;
        Ok(Self { full, train, reference, dataset_seed })
    }

    fn training_node_count(&self) -> Result<usize> {
        self.full.uniform_node_count().ok_or_else(|| {
            Error::Config("dataset.generator: training needs a fixed node count; set equal range bounds such as \"nodes\": [12, 12]".into())
        })
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "seed": self.dataset_seed,
            "graphs": self.full.len(),
            "train_graphs": self.train.len(),
            "reference_graphs": self.reference.len(),
            "split": "seeded shuffle, first half MMD reference, second half training",
            "empirical_edge_prob": self.full.empirical_edge_prob(),
            "train_edge_prob": self.train.empirical_edge_prob(),
            "reference_edge_prob": self.reference.empirical_edge_prob(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeedLabel {
    Seed(u64),
    Mean,
}

impl std::fmt::Display for SeedLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeedLabel::Seed(s) => write!(f, "{s}"),
            SeedLabel::Mean => f.write_str("mean"),
        }
    }
}

/// One line of the sweep CSV. Failed cells carry `error` and no values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub seed: SeedLabel,
    pub mmd: Option<MmdResult>,
    pub early_loss: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub error: Option<String>,
}

/// Everything a sweep cell needs, derived from the config and its seed.
#[derive(Debug, Clone)]
pub struct CellPlan {
    pub tables: KernelTables,
    pub model: DenoiserConfig,
    pub train: TrainConfig,
    pub sample_seed: u64,
}

impl CellPlan {
    pub fn new(cfg: &ExperimentConfig, n_nodes: usize, p: f64, seed: u64) -> Result<Self> {
        let k = &cfg.kernel;
        let root = cell_seed(cfg.seed, p, seed);
        Ok(Self {
            tables: KernelTables::new(&build_schedule(p, k.scale_c, k.steps, k.ramp_frac)?),
            model: cfg.model.denoiser(n_nodes, derive_seed(root, &[0])),
            train: cfg.train.with_seed(derive_seed(root, &[1])),
            sample_seed: derive_seed(root, &[2]),
        })
    }
}

fn run_cell(cfg: &ExperimentConfig, data: &PreparedData, n_nodes: usize, p: f64, seed: u64) -> Result<(MmdResult, f64)> {
    let plan = CellPlan::new(cfg, n_nodes, p, seed)?;
    let trained = train(&data.train, &plan.tables, &plan.model, &plan.train)?;
    let early = trained.history.early_mean(plan.train.early_probe_epochs)?;
    let generated =
        sample_graphs(&trained.denoiser, &plan.tables, cfg.eval.n_generated, &mut rng_from_seed(plan.sample_seed))?;
    Ok((mmd_suite(&generated, &data.reference, &cfg.eval.mmd)?, early))
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("workers: cannot start thread pool: {e}")))?;
    Ok(pool.install(job))
}

fn cells(cfg: &ExperimentConfig) -> Vec<(f64, u64)> {
    cfg.kernel.p_grid.iter().flat_map(|&p| cfg.seeds.iter().map(move |&s| (p, s))).collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn mean_row(p: f64, rows: &[SweepRow]) -> SweepRow {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let failed = rows.len() - ok.len();
    let mmd = (!ok.is_empty()).then(|| {
        let avg = |f: fn(&MmdResult) -> f64| mean(ok.iter().filter_map(|r| r.mmd.as_ref().map(f))).unwrap_or(f64::NAN);
        MmdResult { degree: avg(|m| m.degree), clustering: avg(|m| m.clustering), spectrum: avg(|m| m.spectrum), orbit: avg(|m| m.orbit) }
    });
    SweepRow {
        p,
        seed: SeedLabel::Mean,
        mmd,
        early_loss: mean(ok.iter().filter_map(|r| r.early_loss)),
        wall_time_s: mean(rows.iter().filter_map(|r| r.wall_time_s)),
        error: (failed > 0).then(|| format!("{failed} of {} seeds failed", rows.len())),
    }
}

/// Runs every `(p, seed)` cell and appends one mean row per `p`. Data rows
/// come first in grid-then-seed order. Wall times are measured for every
/// cell regardless of `record_wall_time`.
pub fn run_sweep_rows(cfg: &ExperimentConfig, data: &PreparedData) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let n_nodes = data.training_node_count()?;
    let cells = cells(cfg);
    let mut rows: Vec<SweepRow> = with_workers(cfg.workers, || {
        cells
            .par_iter()
            .map(|&(p, seed)| {
                let start = Instant::now();
                let outcome = run_cell(cfg, data, n_nodes, p, seed);
                let wall = start.elapsed().as_secs_f64();
                let (mmd, early_loss, error) = match outcome {
                    Ok((m, e)) => (Some(m), Some(e), None),
                    Err(e) => (None, None, Some(e.to_string())),
                };
                SweepRow { p, seed: SeedLabel::Seed(seed), mmd, early_loss, wall_time_s: Some(wall), error }
            })
            .collect()
    })?;
    let per_p = cfg.seeds.len();
    let means: Vec<SweepRow> = rows.chunks(per_p).map(|chunk| mean_row(chunk[0].p, chunk)).collect();
    rows.extend(means);
    Ok(rows)
}

/// `(p, mean degree MMD)` from the mean rows, skipping grid points where every seed failed.
pub fn mean_degree_by_p(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.seed == SeedLabel::Mean)
        .filter_map(|r| r.mmd.map(|m| (r.p, m.degree)))
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn mmd_fields(m: Option<MmdResult>) -> [String; 4] {
    match m {
        Some(m) => m.values().map(|v| v.to_string()),
        None => Default::default(),
    }
}

fn csv_bytes(header: &str, records: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header.split(','))?;
    for rec in records {
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn sweep_csv(rows: &[SweepRow], record_wall_time: bool) -> Result<Vec<u8>> {
    csv_bytes(
        SWEEP_HEADER,
        rows.iter().map(|r| {
            let mut rec = vec![r.p.to_string(), r.seed.to_string()];
            rec.extend(mmd_fields(r.mmd));
            rec.push(opt(r.early_loss));
            rec.push(if record_wall_time { opt(r.wall_time_s) } else { String::new() });
            rec.push(r.error.clone().unwrap_or_default());
            rec
        }),
    )
}

fn timings_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    csv_bytes(
        "p,seed,wall_time_s",
        rows.iter()
            .filter(|r| r.seed != SeedLabel::Mean)
            .map(|r| vec![r.p.to_string(), r.seed.to_string(), opt(r.wall_time_s)]),
    )
}

fn write_meta(path: &Path, experiment: &str, cfg: &ExperimentConfig, data: &PreparedData, outputs: &[&str]) -> Result<()> {
    let meta = json!({
        "experiment": experiment,
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "dataset": data.describe(),
        "outputs": outputs,
    });
    let mut bytes = serde_json::to_vec_pretty(&meta)?;
    bytes.push(b'\n');
    super::atomic_write(path, &bytes)
}

/// Full prior sweep: generates and splits the dataset, runs all cells and
/// writes `sweep.csv`, `timings.csv` and `meta.json` into `cfg.output_dir`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let data = PreparedData::from_config(cfg)?;
    let rows = run_sweep_rows(cfg, &data)?;
    let dir = &cfg.output_dir;
    super::atomic_write(dir.join("sweep.csv"), &sweep_csv(&rows, cfg.record_wall_time)?)?;
    super::atomic_write(dir.join("timings.csv"), &timings_csv(&rows)?)?;
    write_meta(&dir.join("meta.json"), "sweep", cfg, &data, &["sweep.csv", "timings.csv"])?;
    Ok(rows)
}

/// One line of the prior-sample MMD CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorMmdRow {
    pub p: f64,
    pub seed: u64,
    pub mmd: Option<MmdResult>,
    pub error: Option<String>,
}

fn prior_cell(cfg: &ExperimentConfig, reference: &GraphDataset, p: f64, seed: u64) -> Result<MmdResult> {
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[PRIOR_STREAM, p.to_bits(), seed]));
    // Node counts cycle through the reference sizes so variable-size datasets
    // are compared against samples of matching sizes.
    let graphs = (0..cfg.eval.n_generated)
        .map(|i| er_sample(reference.graphs[i % reference.len()].node_count(), p, &mut rng))
        .collect();
    let generated = GraphDataset::new(graphs, DatasetSource::Sampled { prior_p: p })?;
    mmd_suite(&generated, reference, &cfg.eval.mmd)
}

/// Untrained baseline: Erdős–Rényi samples at each grid `p` scored against the reference half.
pub fn prior_mmd_rows(cfg: &ExperimentConfig, data: &PreparedData) -> Result<Vec<PriorMmdRow>> {
    cfg.validate()?;
    let cells = cells(cfg);
    with_workers(cfg.workers, || {
        cells
            .par_iter()
            .map(|&(p, seed)| match prior_cell(cfg, &data.reference, p, seed) {
                Ok(m) => PriorMmdRow { p, seed, mmd: Some(m), error: None },
                Err(e) => PriorMmdRow { p, seed, mmd: None, error: Some(e.to_string()) },
            })
            .collect()
    })
}

/// Writes `prior_mmd.csv` and `prior_mmd_meta.json` into `cfg.output_dir`.
pub fn prior_mmd_experiment(cfg: &ExperimentConfig) -> Result<Vec<PriorMmdRow>> {
    cfg.validate()?;
    let data = PreparedData::from_config(cfg)?;
    let rows = prior_mmd_rows(cfg, &data)?;
    let bytes = csv_bytes(
        PRIOR_MMD_HEADER,
        rows.iter().map(|r| {
            let mut rec = vec![r.p.to_string(), r.seed.to_string()];
            rec.extend(mmd_fields(r.mmd));
            rec.push(r.error.clone().unwrap_or_default());
            rec
        }),
    )?;
    let dir = &cfg.output_dir;
    super::atomic_write(dir.join("prior_mmd.csv"), &bytes)?;
    write_meta(&dir.join("prior_mmd_meta.json"), "prior_mmd", cfg, &data, &["prior_mmd.csv"])?;
    Ok(rows)
}
