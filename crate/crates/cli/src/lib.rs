//! `graphdiff` command line.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! failures while running.

use std::ffi::OsString;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use graphdiff_core::diffusion::sample_graphs;
use graphdiff_core::graphs::{read_dataset, write_dataset, GraphDataset};
use graphdiff_core::harness::{
    atomic_write, emit_forward_curves, parse_config, prior_mmd_experiment, run_sweep, CellPlan, ExperimentConfig,
    KernelConfig, PreparedData, SeedLabel,
};
use graphdiff_core::kernel::{build_schedule, KernelTables};
use graphdiff_core::mmd::{mmd_suite, MmdConfig, MmdResult};
use graphdiff_core::model::{load_checkpoint, save_checkpoint};
use graphdiff_core::rng::{derive_seed, rng_from_seed};
use graphdiff_core::{diffusion, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

const SAMPLE_STREAM: u64 = 0x7361_6d70;

#[derive(Debug, Parser)]
#[command(name = "graphdiff", version, about = "Discrete graph diffusion with asymmetric Bernoulli kernels")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Global seed; overrides the config's `seed`. Every random stream derives from it.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Output directory; overrides the config's `output_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the configured dataset and its train/reference split as JSONL.
    GenData,
    /// Train one denoiser at a given prior probability.
    Train(TrainArgs),
    /// Draw graphs from a trained checkpoint by reverse diffusion.
    Sample(SampleArgs),
    /// MMD between two JSONL graph files.
    Eval(EvalArgs),
    /// Train and evaluate over the configured prior grid and seeds.
    Sweep,
    /// MMD of untrained Erdős–Rényi prior samples against the reference split.
    PriorMmd,
    /// Forward marginal curves for a list of prior probabilities.
    Curves(CurvesArgs),
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Prior edge probability of the kernel.
    #[arg(long)]
    p: f64,
    /// Training graphs; defaults to the training half of the configured dataset.
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_name = "PATH")]
    checkpoint: PathBuf,
    /// Prior edge probability the checkpoint was trained with.
    #[arg(long)]
    p: f64,
    /// Number of graphs; defaults to the config's `eval.n_generated`.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    generated: PathBuf,
    /// Reference graphs; defaults to the reference half of the configured dataset.
    #[arg(long, value_name = "PATH")]
    reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurvesArgs {
    /// Comma-separated prior probabilities; defaults to the config's grid.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_config() { EXIT_CONFIG } else { EXIT_RUNTIME };
        Self { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Context {
    config: Option<ExperimentConfig>,
    seed: u64,
    out: PathBuf,
}

impl Context {
    fn new(cli: &Cli) -> CliResult<Self> {
        let mut config = cli.config.as_deref().map(parse_config).transpose()?;
        if let Some(cfg) = config.as_mut() {
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(out) = &cli.out {
                cfg.output_dir = out.clone();
            }
        }
        let seed = cli.seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(0);
        let out = cli
            .out
            .clone()
            .or_else(|| config.as_ref().map(|c| c.output_dir.clone()))
            .unwrap_or_else(|| PathBuf::from("results"));
        Ok(Self { config, seed, out })
    }

    fn require_config(&self, command: &str) -> CliResult<&ExperimentConfig> {
        self.config.as_ref().ok_or_else(|| usage(format!("`{command}` needs --config <path>")))
    }

    fn kernel(&self) -> KernelConfig {
        self.config.as_ref().map(|c| c.kernel.clone()).unwrap_or_default()
    }

    fn mmd(&self) -> MmdConfig {
        self.config.as_ref().map(|c| c.eval.mmd).unwrap_or_default()
    }

    fn out_file(&self, name: &str) -> CliResult<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(Error::from)?;
        Ok(self.out.join(name))
    }
}

fn tables_for(kernel: &KernelConfig, p: f64) -> CliResult<KernelTables> {
    if !(0.0..=1.0).contains(&p) {
        return Err(usage(format!("--p: {p} outside [0, 1]")));
    }
    Ok(KernelTables::new(&build_schedule(p, kernel.scale_c, kernel.steps, kernel.ramp_frac)?))
}

fn mmd_line(m: &MmdResult) -> String {
    format!("degree={} clustering={} spectrum={} orbit={}", m.degree, m.clustering, m.spectrum, m.orbit)
}

fn gen_data(ctx: &Context) -> CliResult<()> {
    let cfg = ctx.require_config("gen-data")?;
    let data = PreparedData::from_config(cfg)?;
    for (name, ds) in [("dataset.jsonl", &data.full), ("train.jsonl", &data.train), ("reference.jsonl", &data.reference)] {
        write_dataset(ds, ctx.out_file(name)?)?;
    }
    println!(
        "wrote {} graphs ({} train, {} reference), edge probability {}",
        data.full.len(),
        data.train.len(),
        data.reference.len(),
        data.full.empirical_edge_prob()
    );
    Ok(())
}

fn train_one(ctx: &Context, args: &TrainArgs) -> CliResult<()> {
    let cfg = ctx.require_config("train")?;
    let ds: GraphDataset = match &args.data {
        Some(path) => read_dataset(path)?,
        None => PreparedData::from_config(cfg)?.train,
    };
    let n = ds.uniform_node_count().ok_or_else(|| usage("training graphs must share one node count"))?;
    tables_for(&cfg.kernel, args.p)?;
    let plan = CellPlan::new(cfg, n, args.p, cfg.seeds[0])?;
    let trained = diffusion::train(&ds, &plan.tables, &plan.model, &plan.train)?;
    save_checkpoint(&trained.denoiser, &trained.optimizer, ctx.out_file("checkpoint.json")?)?;
    let mut history = Vec::new();
    trained.history.write_csv(&mut history)?;
    atomic_write(ctx.out_file("loss_history.csv")?, &history)?;
    let early = trained.history.early_mean(plan.train.early_probe_epochs)?;
    println!(
        "trained {} epochs at p={}: final loss {}, early loss {early}",
        trained.history.epoch_losses.len(),
        args.p,
        trained.history.epoch_losses.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn sample(ctx: &Context, args: &SampleArgs) -> CliResult<()> {
    let tables = tables_for(&ctx.kernel(), args.p)?;
    let count = args.count.or(ctx.config.as_ref().map(|c| c.eval.n_generated)).unwrap_or(64);
    if count == 0 {
        return Err(usage("--count: must be at least 1"));
    }
    let (denoiser, _) = load_checkpoint(&args.checkpoint)?;
    let mut rng = rng_from_seed(derive_seed(ctx.seed, &[SAMPLE_STREAM, args.p.to_bits()]));
    let generated = sample_graphs(&denoiser, &tables, count, &mut rng)?;
    write_dataset(&generated, ctx.out_file("generated.jsonl")?)?;
    println!("sampled {count} graphs, edge probability {}", generated.empirical_edge_prob());
    Ok(())
}

fn eval(ctx: &Context, args: &EvalArgs) -> CliResult<()> {
    let generated = read_dataset(&args.generated)?;
    let reference = match &args.reference {
        Some(path) => read_dataset(path)?,
        None => PreparedData::from_config(ctx.require_config("eval without --reference")?)?.reference,
    };
    let m = mmd_suite(&generated, &reference, &ctx.mmd())?;
    let csv = format!("mmd_degree,mmd_clustering,mmd_spectrum,mmd_orbit\n{}\n", m.to_csv_record());
    atomic_write(ctx.out_file("eval.csv")?, csv.as_bytes())?;
    println!("{}", mmd_line(&m));
    Ok(())
}

fn sweep(ctx: &Context) -> CliResult<()> {
    let cfg = ctx.require_config("sweep")?;
    let rows = run_sweep(cfg)?;
    let failed = rows.iter().filter(|r| r.seed != SeedLabel::Mean && r.error.is_some()).count();
    for r in rows.iter().filter(|r| r.seed == SeedLabel::Mean) {
        match &r.mmd {
            Some(m) => println!("p={}: {}", r.p, mmd_line(m)),
            None => println!("p={}: {}", r.p, r.error.as_deref().unwrap_or("no result")),
        }
    }
    println!("wrote {}", cfg.output_dir.join("sweep.csv").display());
    if failed > 0 {
        eprintln!("warning: {failed} cells failed; see the error column");
    }
    Ok(())
}

fn prior_mmd(ctx: &Context) -> CliResult<()> {
    let cfg = ctx.require_config("prior-mmd")?;
    let rows = prior_mmd_experiment(cfg)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("wrote {} ({} rows)", cfg.output_dir.join("prior_mmd.csv").display(), rows.len());
    if failed > 0 {
        eprintln!("warning: {failed} cells failed; see the error column");
    }
    Ok(())
}

fn curves(ctx: &Context, args: &CurvesArgs) -> CliResult<()> {
    let kernel = ctx.kernel();
    let grid = if args.p.is_empty() { kernel.p_grid.clone() } else { args.p.clone() };
    let schedules = grid
        .iter()
        .map(|&p| tables_for(&kernel, p).map(|t| t.schedule().clone()))
        .collect::<CliResult<Vec<_>>>()?;
    let path = ctx.out_file("curves.csv")?;
    emit_forward_curves(&schedules, &path)?;
    let mut legend = String::from("schedule_id,p\n");
    for (i, p) in grid.iter().enumerate() {
        legend.push_str(&format!("{i},{p}\n"));
    }
    atomic_write(ctx.out_file("curves_schedules.csv")?, legend.as_bytes())?;
    println!("wrote {} ({} schedules)", path.display(), schedules.len());
    Ok(())
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::GenData => gen_data(&ctx),
        Command::Train(a) => train_one(&ctx, a),
        Command::Sample(a) => sample(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
        Command::Sweep => sweep(&ctx),
        Command::PriorMmd => prior_mmd(&ctx),
        Command::Curves(a) => curves(&ctx, a),
    }
}

/// Runs the CLI on `argv` (program name first), writing to the given streams.
pub fn cli_main_with<I, T>(argv: I, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_CONFIG
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stderr = std::io::stderr();
    let mut lock = BufWriter::new(stderr.lock());
    let code = cli_main_with(argv, &mut lock);
    let _ = lock.flush();
    code
}
