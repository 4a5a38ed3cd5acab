use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use negsamp::dataset::load_lcc;
use negsamp::dpp::dpp_check;
use negsamp::graph::Split;
use negsamp::model::{DfsLength, ModelConfig, ModelKind, OmegaSpec};
use negsamp::negative::{inspect_node, negative_count};
use negsamp::rng::{stream, Stream};
use negsamp::sbm::{make_sbm, SbmConfig};
use negsamp::sweep::{
    parse_usize_list, run_sweep, threads_from_env, ModelOverride, SweepConfig, SweepParam,
    SweepReport, MAX_FAILURE_FRACTION,
};

#[derive(Debug, Parser)]
#[command(
    name = "negsamp",
    version,
    about = "GCN training with DPP-selected negative samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model × depth × seed grid and write results.csv and summary.md.
    Run(RunArgs),
    /// Generate a stochastic block model dataset bundle.
    MakeSbm(SbmArgs),
    /// Compare k-DPP samples with the exact distribution on random kernels.
    DppCheck(DppCheckArgs),
    /// Show the DFS path, candidates, kernel spectrum and negatives of one node.
    NegDump(NegDumpArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Dataset bundle directory.
    #[arg(long)]
    dataset: PathBuf,
    /// Comma-separated subset of gcn,rgcn,pgcn,d2gcn.
    #[arg(long, default_value = "gcn,rgcn,pgcn,d2gcn")]
    models: String,
    /// Depths as an inclusive range `a..b` or a list.
    #[arg(long, default_value = "2..6")]
    layers: String,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    /// DFS path length, or `auto` for a quarter of the estimated diameter.
    #[arg(long, default_value = "5")]
    dfs_length: DfsLength,
    /// `trainable` or `fixed:<value>`.
    #[arg(long, default_value = "trainable")]
    omega: OmegaSpec,
    #[arg(long, default_value_t = 0.15)]
    ppr_alpha: f64,
    #[arg(long, default_value_t = 50)]
    ppr_iters: usize,
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
    #[arg(long, default_value_t = 0.0)]
    weight_decay: f64,
    /// Base seed; run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Node subset MAD is computed on.
    #[arg(long, default_value = "all")]
    mad_split: Split,
    /// L1-normalise feature rows after loading.
    #[arg(long)]
    row_normalize: bool,
    /// Per-model override `model.key=value` (keys: dfs_length, omega, ppr_alpha).
    #[arg(long = "set", value_name = "MODEL.KEY=VALUE")]
    overrides: Vec<String>,
    /// Sensitivity sweep, e.g. `dfs_length=2..8` or `omega=trainable,1,2,3`.
    #[arg(long)]
    sweep: Option<SweepParam>,
    /// Allow depths outside 2..6.
    #[arg(long)]
    any_depth: bool,
    /// Record training time in the `seconds` column and timings.csv.
    #[arg(long)]
    wallclock: bool,
    /// Write a JSON checkpoint per run.
    #[arg(long)]
    save_checkpoints: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SbmArgs {
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    #[arg(long, default_value_t = 30)]
    per_block: usize,
    #[arg(long, default_value_t = 0.3)]
    p_in: f64,
    #[arg(long, default_value_t = 0.02)]
    p_out: f64,
    /// Standard deviation of the feature noise.
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DppCheckArgs {
    #[arg(long, default_value_t = 5)]
    kernels: usize,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exit with failure when any TV distance reaches this value.
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
}

#[derive(Debug, Args)]
struct NegDumpArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Node id in the largest connected component.
    #[arg(long)]
    node: usize,
    #[arg(long, default_value_t = 5)]
    dfs_length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    row_normalize: bool,
}

fn parse_models(s: &str) -> Result<Vec<ModelKind>> {
    s.split(',')
        .map(|m| m.parse().map_err(anyhow::Error::from))
        .collect()
}

fn parse_overrides(items: &[String]) -> Result<BTreeMap<ModelKind, ModelOverride>> {
    let mut out: BTreeMap<ModelKind, ModelOverride> = BTreeMap::new();
    for item in items {
        let (target, value) = item
            .split_once('=')
            .with_context(|| format!("override `{item}` is not model.key=value"))?;
        let (model, key) = target
            .split_once('.')
            .with_context(|| format!("override `{item}` is not model.key=value"))?;
        let model: ModelKind = model.parse()?;
        out.entry(model).or_default().set(key, value)?;
    }
    Ok(out)
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let mut template = ModelConfig::new(ModelKind::Gcn, ModelConfig::MIN_LAYERS);
    template.epochs = args.epochs;
    template.lr = args.lr;
    template.hidden_dim = args.hidden;
    template.dfs_length = args.dfs_length;
    template.omega = args.omega;
    template.ppr_alpha = args.ppr_alpha;
    template.ppr_iters = args.ppr_iters;
    template.dropout = args.dropout;
    template.weight_decay = args.weight_decay;
    template.mad_split = args.mad_split;

    let mut config = SweepConfig::new(&args.dataset);
    config.row_normalize = args.row_normalize;
    config.models = parse_models(&args.models)?;
    config.layers = parse_usize_list(&args.layers)?;
    config.runs = args.runs;
    config.base_seed = args.seed;
    config.template = template;
    config.overrides = parse_overrides(&args.overrides)?;
    config.sweep = args.sweep;
    config.any_depth = args.any_depth;
    config.wallclock = args.wallclock;
    config.save_checkpoints = args.save_checkpoints;
    config.threads = threads_from_env()?;

    let (report, load) = run_sweep(&config, &args.out)
        .with_context(|| format!("sweep on {}", args.dataset.display()))?;
    println!("{load}");
    if let SweepReport::Sensitivity { param, variants } = &report {
        println!("sensitivity over {param}: {} values", variants.len());
    }
    let fraction = report.failure_fraction();
    let failed: usize = report.outcomes().iter().map(|o| o.failures.len()).sum();
    let total: usize = report
        .outcomes()
        .iter()
        .map(|o| o.failures.len() + o.records.len())
        .sum();
    println!(
        "runs: {total} total, {failed} failed; output in {}",
        args.out.display()
    );
    if fraction > MAX_FAILURE_FRACTION {
        eprintln!(
            "negsamp: {:.1}% of runs failed (limit {:.0}%)",
            100.0 * fraction,
            100.0 * MAX_FAILURE_FRACTION
        );
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn sbm(args: SbmArgs) -> Result<ExitCode> {
    let mut config = SbmConfig::new(
        args.blocks,
        args.per_block,
        args.p_in,
        args.p_out,
        args.seed,
    );
    config.feature_noise = args.noise;
    let g = make_sbm(&config, &args.out)?;
    println!(
        "wrote {} nodes, {} edges, {} classes to {}",
        g.num_nodes(),
        g.num_edges(),
        g.num_classes,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn check(args: DppCheckArgs) -> Result<ExitCode> {
    let tvs = dpp_check(args.kernels, args.n, args.k, args.samples, args.seed)?;
    for (i, tv) in tvs.iter().enumerate() {
        println!("kernel {i}: tv={tv:.6}");
    }
    let max = tvs.iter().copied().fold(0.0, f64::max);
    println!(
        "max tv={max:.6} over {} kernels (n={}, k={}, samples={})",
        tvs.len(),
        args.n,
        args.k,
        args.samples
    );
    if max >= args.threshold {
        eprintln!(
            "negsamp: TV distance {max:.6} reaches threshold {}",
            args.threshold
        );
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn dump(args: NegDumpArgs) -> Result<ExitCode> {
    let (g, load) = load_lcc(&args.dataset, args.row_normalize)?;
    println!("{load}");
    if args.node >= g.num_nodes() {
        bail!(
            "node {} outside the {}-node component",
            args.node,
            g.num_nodes()
        );
    }
    if args.dfs_length == 0 {
        bail!("DFS length must be >= 1");
    }
    let mut rng = stream(args.seed, Stream::Check, &[args.node as u64]);
    let ins = inspect_node(&g, args.node, &g.features, args.dfs_length, &mut rng)?;
    let join = |v: &[usize]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("node: {}", args.node);
    println!("neighbors: {}", join(g.neighbors(args.node)));
    println!("k: {}", negative_count(&g, args.node));
    println!("dfs_path: {}", join(&ins.path.nodes));
    println!("candidates: {}", join(&ins.candidates.members));
    println!(
        "eigenvalues: {}",
        ins.eigenvalues
            .iter()
            .map(|x| format!("{x:.6e}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!("negatives: {}", join(&ins.sample.members));
    if let Some(note) = ins.sample.note {
        println!("note: {note:?}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    info!("{cli:?}");
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::MakeSbm(a) => sbm(a),
        Command::DppCheck(a) => check(a),
        Command::NegDump(a) => dump(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("negsamp: {e:#}");
            ExitCode::FAILURE
        }
    }
}
