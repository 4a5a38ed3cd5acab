//! Model × depth × seed sweeps with CSV and markdown output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{error, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::load_lcc;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{
    train, Checkpoint, DfsLength, ModelConfig, ModelKind, OmegaSpec, RunRecord, Trained,
};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "NEGSAMP_THREADS";
pub const RESULTS_HEADER: &str =
    "model,layers,seed,epoch,loss,train_acc,val_acc,test_acc,mad,seconds";
/// A sweep fails as a whole when more than this fraction of runs fail.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

/// Settings that may differ per model kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelOverride {
    pub dfs_length: Option<DfsLength>,
    pub omega: Option<OmegaSpec>,
    pub ppr_alpha: Option<f64>,
}

impl ModelOverride {
    /// Applies one `key=value` pair (`dfs_length`, `omega` or `ppr_alpha`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dfs_length" => self.dfs_length = Some(value.parse()?),
            "omega" => self.omega = Some(value.parse()?),
            "ppr_alpha" => {
                let a: f64 = value
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad ppr_alpha `{value}`")))?;
                self.ppr_alpha = Some(a);
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown override `{other}`"
                )))
            }
        }
        Ok(())
    }

    fn apply(&self, c: &mut ModelConfig) {
        if let Some(d) = self.dfs_length {
            c.dfs_length = d;
        }
        if let Some(w) = self.omega {
            c.omega = w;
        }
        if let Some(a) = self.ppr_alpha {
            c.ppr_alpha = a;
        }
    }
}

/// One-parameter sensitivity sweep, e.g. `dfs_length=2..8` or `omega=1,2,3`.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepParam {
    DfsLength(Vec<usize>),
    Omega(Vec<OmegaSpec>),
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::DfsLength(_) => "dfs_length",
            SweepParam::Omega(_) => "omega",
        }
    }

    /// Labels and config edits, one per swept value.
    fn variants(&self) -> Vec<(String, ModelOverride)> {
        match self {
            SweepParam::DfsLength(values) => values
                .iter()
                .map(|&n| {
                    let o = ModelOverride {
                        dfs_length: Some(DfsLength::Fixed(n)),
                        ..Default::default()
                    };
                    (n.to_string(), o)
                })
                .collect(),
            SweepParam::Omega(values) => values
                .iter()
                .map(|&w| {
                    let label = match w {
                        OmegaSpec::Trainable => "trainable".to_string(),
                        OmegaSpec::Fixed(x) => x.to_string(),
                    };
                    let o = ModelOverride {
                        omega: Some(w),
                        ..Default::default()
                    };
                    (label, o)
                })
                .collect(),
        }
    }
}

/// Parses an inclusive range `a..b` or a comma-separated list.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad integer list `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect()
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, values) = s
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("sweep `{s}` is not key=values")))?;
        match key.trim() {
            "dfs_length" => {
                let v = parse_usize_list(values)?;
                if v.contains(&0) {
                    return Err(Error::InvalidArgument("DFS length must be >= 1".into()));
                }
                Ok(SweepParam::DfsLength(v))
            }
            "omega" => Ok(SweepParam::Omega(
                values
                    .split(',')
                    .map(|v| v.trim().parse())
                    .collect::<Result<_>>()?,
            )),
            other => Err(Error::InvalidArgument(format!("cannot sweep `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub dataset: PathBuf,
    pub row_normalize: bool,
    pub models: Vec<ModelKind>,
    pub layers: Vec<usize>,
    pub runs: usize,
    pub base_seed: u64,
    /// Shared hyperparameters; `kind`, `num_layers` and `seed` are set per run.
    pub template: ModelConfig,
    pub overrides: BTreeMap<ModelKind, ModelOverride>,
    pub sweep: Option<SweepParam>,
    /// Allows depths outside the usual range.
    pub any_depth: bool,
    /// Record real training time in the `seconds` column.
    pub wallclock: bool,
    pub save_checkpoints: bool,
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn new(dataset: impl Into<PathBuf>) -> Self {
        SweepConfig {
            dataset: dataset.into(),
            row_normalize: false,
            models: ModelKind::ALL.to_vec(),
            layers: (ModelConfig::MIN_LAYERS..=ModelConfig::MAX_LAYERS).collect(),
            runs: 10,
            base_seed: 0,
            template: ModelConfig::new(ModelKind::Gcn, 2),
            overrides: BTreeMap::new(),
            sweep: None,
            any_depth: false,
            wallclock: false,
            save_checkpoints: false,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.runs == 0 {
            return bad("runs must be >= 1".into());
        }
        if self.models.is_empty() || self.layers.is_empty() {
            return bad("need at least one model and one depth".into());
        }
        if !self.any_depth {
            if let Some(&l) = self
                .layers
                .iter()
                .find(|l| !(ModelConfig::MIN_LAYERS..=ModelConfig::MAX_LAYERS).contains(l))
            {
                return bad(format!(
                    "depth {l} outside [{}, {}]",
                    ModelConfig::MIN_LAYERS,
                    ModelConfig::MAX_LAYERS
                ));
            }
        }
        Ok(())
    }

    /// Every run of one sweep variant, in output order.
    fn jobs(&self, extra: &ModelOverride) -> Vec<ModelConfig> {
        let mut models = self.models.clone();
        models.sort();
        models.dedup();
        let mut layers = self.layers.clone();
        layers.sort();
        layers.dedup();
        let mut jobs = Vec::new();
        for &kind in &models {
            for &l in &layers {
                for r in 0..self.runs {
                    let mut c = self.template.clone();
                    c.kind = kind;
                    c.num_layers = l;
                    c.seed = self.base_seed + r as u64;
                    if let Some(o) = self.overrides.get(&kind) {
                        o.apply(&mut c);
                    }
                    extra.apply(&mut c);
                    jobs.push(c);
                }
            }
        }
        jobs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub model: ModelKind,
    pub layers: usize,
    pub seed: u64,
    pub message: String,
}

/// Mean and sample standard deviation of final-epoch metrics for one
/// (model, depth) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub model: ModelKind,
    pub layers: usize,
    pub runs: usize,
    pub failed: usize,
    pub test_acc_mean: f64,
    pub test_acc_std: f64,
    pub mad_mean: f64,
    pub mad_std: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
    pub summary: Vec<CellSummary>,
}

impl SweepOutcome {
    pub fn cell(&self, model: ModelKind, layers: usize) -> Option<&CellSummary> {
        self.summary
            .iter()
            .find(|c| c.model == model && c.layers == layers)
    }

    pub fn failure_fraction(&self) -> f64 {
        let total = self.records.len() + self.failures.len();
        if total == 0 {
            0.0
        } else {
            self.failures.len() as f64 / total as f64
        }
    }
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Final test accuracies, final MADs and failure count of one cell.
type CellValues = (Vec<f64>, Vec<f64>, usize);

pub fn summarize(records: &[RunRecord], failures: &[RunFailure]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(ModelKind, usize), CellValues> = BTreeMap::new();
    for r in records {
        let e = cells.entry((r.model, r.layers)).or_default();
        e.0.push(r.last().test_acc);
        e.1.push(r.last().mad);
    }
    for f in failures {
        cells.entry((f.model, f.layers)).or_default().2 += 1;
    }
    cells
        .into_iter()
        .map(|((model, layers), (acc, mad, failed))| {
            let (test_acc_mean, test_acc_std) = mean_std(&acc);
            let (mad_mean, mad_std) = mean_std(&mad);
            CellSummary {
                model,
                layers,
                runs: acc.len(),
                failed,
                test_acc_mean,
                test_acc_std,
                mad_mean,
                mad_std,
            }
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn results_csv(records: &[RunRecord], wallclock: bool) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        let seconds = if wallclock { r.seconds } else { 0.0 };
        for e in &r.epochs {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.model,
                r.layers,
                r.seed,
                e.epoch,
                e.loss,
                e.train_acc,
                e.val_acc,
                e.test_acc,
                e.mad,
                seconds
            )
            .unwrap();
        }
    }
    out
}

pub fn summary_markdown(summary: &[CellSummary], failures: &[RunFailure]) -> String {
    let mut out = String::from(
        "# Sweep summary\n\nFinal-epoch test accuracy and MAD, mean ± sample std over runs.\n\n",
    );
    out.push_str("| model | layers | runs | failed | test accuracy | MAD |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for c in summary {
        writeln!(
            out,
            "| {} | {} | {} | {} | {:.4} ± {:.4} | {:.4} ± {:.4} |",
            c.model,
            c.layers,
            c.runs,
            c.failed,
            c.test_acc_mean,
            c.test_acc_std,
            c.mad_mean,
            c.mad_std
        )
        .unwrap();
    }
    if !failures.is_empty() {
        out.push_str("\n## Failed runs\n\n");
        for f in failures {
            writeln!(
                out,
                "- {} layers={} seed={}: {}",
                f.model, f.layers, f.seed, f.message
            )
            .unwrap();
        }
    }
    out
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Reads the worker cap from [`THREADS_ENV`].
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(Some)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "{THREADS_ENV} must be a positive integer, got `{v}`"
                ))
            }),
        Err(_) => Ok(None),
    }
}

fn run_jobs(g: &Graph, jobs: &[ModelConfig]) -> (Vec<RunRecord>, Vec<RunFailure>, Vec<Trained>) {
    let results: Vec<(&ModelConfig, Result<Trained>)> =
        jobs.par_iter().map(|c| (c, train(g, c))).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut trained = Vec::new();
    for (c, r) in results {
        match r {
            Ok(t) => {
                records.push(t.record.clone());
                trained.push(t);
            }
            Err(e) => {
                error!(
                    "{} layers={} seed={} failed: {e}",
                    c.kind, c.num_layers, c.seed
                );
                failures.push(RunFailure {
                    model: c.kind,
                    layers: c.num_layers,
                    seed: c.seed,
                    message: e.to_string(),
                });
            }
        }
    }
    (records, failures, trained)
}

/// Runs one sweep variant on an in-memory graph and writes its outputs.
fn sweep_variant(
    g: &Graph,
    config: &SweepConfig,
    extra: &ModelOverride,
    out: &Path,
) -> Result<SweepOutcome> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let jobs = config.jobs(extra);
    info!(
        "running {} training runs into {}",
        jobs.len(),
        out.display()
    );
    let (records, failures, trained) = run_jobs(g, &jobs);
    write_file(
        &out.join("results.csv"),
        &results_csv(&records, config.wallclock),
    )?;
    let summary = summarize(&records, &failures);
    write_file(
        &out.join("summary.md"),
        &summary_markdown(&summary, &failures),
    )?;
    if config.wallclock {
        let mut t = String::from("model,layers,seed,seconds\n");
        for r in &records {
            writeln!(t, "{},{},{},{:.3}", r.model, r.layers, r.seed, r.seconds).unwrap();
        }
        write_file(&out.join("timings.csv"), &t)?;
    }
    if config.save_checkpoints {
        let dir = out.join("checkpoints");
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for t in &trained {
            let r = &t.record;
            Checkpoint::from_model(&t.model)
                .save(&dir.join(format!("{}-L{}-s{}.json", r.model, r.layers, r.seed)))?;
        }
    }
    Ok(SweepOutcome {
        records,
        failures,
        summary,
    })
}

/// Result of a sweep, or of each value of a sensitivity sweep.
#[derive(Debug, Clone)]
pub enum SweepReport {
    Single(SweepOutcome),
    Sensitivity {
        param: &'static str,
        variants: Vec<(String, SweepOutcome)>,
    },
}

impl SweepReport {
    pub fn outcomes(&self) -> Vec<&SweepOutcome> {
        match self {
            SweepReport::Single(o) => vec![o],
            SweepReport::Sensitivity { variants, .. } => variants.iter().map(|(_, o)| o).collect(),
        }
    }

    pub fn failure_fraction(&self) -> f64 {
        let (failed, total) = self.outcomes().iter().fold((0, 0), |(f, t), o| {
            (f + o.failures.len(), t + o.failures.len() + o.records.len())
        });
        if total == 0 {
            0.0
        } else {
            failed as f64 / total as f64
        }
    }
}

fn sensitivity_outputs(param: &str, variants: &[(String, SweepOutcome)]) -> (String, String) {
    let mut csv =
        format!("{param},model,layers,runs,test_acc_mean,test_acc_std,mad_mean,mad_std\n");
    let mut md = format!(
        "# Sensitivity to {param}\n\nFinal-epoch test accuracy and MAD, mean ± sample std over runs.\n\n| {param} | model | layers | test accuracy | MAD |\n|---|---|---|---|---|\n"
    );
    for (label, o) in variants {
        for c in &o.summary {
            writeln!(
                csv,
                "{label},{},{},{},{},{},{},{}",
                c.model, c.layers, c.runs, c.test_acc_mean, c.test_acc_std, c.mad_mean, c.mad_std
            )
            .unwrap();
            writeln!(
                md,
                "| {label} | {} | {} | {:.4} ± {:.4} | {:.4} ± {:.4} |",
                c.model, c.layers, c.test_acc_mean, c.test_acc_std, c.mad_mean, c.mad_std
            )
            .unwrap();
        }
    }
    (csv, md)
}

/// Runs the sweep on `g`, writing `results.csv` and `summary.md` into `out`
/// (one subdirectory per value in sensitivity mode, plus
/// `sensitivity.csv`/`sensitivity.md`).
pub fn run_sweep_on(g: &Graph, config: &SweepConfig, out: &Path) -> Result<SweepReport> {
    config.validate()?;
    with_pool(config.threads, || match &config.sweep {
        None => Ok(SweepReport::Single(sweep_variant(
            g,
            config,
            &ModelOverride::default(),
            out,
        )?)),
        Some(param) => {
            let mut variants = Vec::new();
            for (label, extra) in param.variants() {
                let dir = out.join(format!("{}={label}", param.name()));
                variants.push((label, sweep_variant(g, config, &extra, &dir)?));
            }
            let (csv, md) = sensitivity_outputs(param.name(), &variants);
            write_file(&out.join("sensitivity.csv"), &csv)?;
            write_file(&out.join("sensitivity.md"), &md)?;
            Ok(SweepReport::Sensitivity {
                param: param.name(),
                variants,
            })
        }
    })?
}

/// Loads `config.dataset` (largest connected component) and runs the sweep.
pub fn run_sweep(
    config: &SweepConfig,
    out: &Path,
) -> Result<(SweepReport, crate::dataset::LoadReport)> {
    let (g, report) = load_lcc(&config.dataset, config.row_normalize)?;
    info!("{report}");
    Ok((run_sweep_on(&g, config, out)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{generate_sbm, SbmConfig};

    fn small_config() -> SweepConfig {
        let mut c = SweepConfig::new("unused");
        c.models = vec![ModelKind::D2gcn, ModelKind::Gcn];
        c.layers = vec![3, 2];
        c.runs = 2;
        c.base_seed = 5;
        c.template.epochs = 3;
        c.template.hidden_dim = 8;
        c
    }

    #[test]
    fn parses_lists_and_sweeps() {
        assert_eq!(parse_usize_list("2..6").unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(parse_usize_list("3, 5").unwrap(), vec![3, 5]);
        assert!(parse_usize_list("6..2").is_err());
        assert_eq!(
            "dfs_length=2..4".parse::<SweepParam>().unwrap(),
            SweepParam::DfsLength(vec![2, 3, 4])
        );
        assert_eq!(
            "omega=trainable,1,fixed:2".parse::<SweepParam>().unwrap(),
            SweepParam::Omega(vec![
                OmegaSpec::Trainable,
                OmegaSpec::Fixed(1.0),
                OmegaSpec::Fixed(2.0)
            ])
        );
        assert!("hidden=3".parse::<SweepParam>().is_err());
    }

    #[test]
    fn job_grid_counts_and_seeds() {
        let mut c = small_config();
        c.models = vec![ModelKind::Gcn, ModelKind::D2gcn];
        c.layers = (2..=6).collect();
        c.runs = 10;
        let jobs = c.jobs(&ModelOverride::default());
        assert_eq!(jobs.len(), 100);
        assert_eq!(jobs[0].seed, 5);
        assert_eq!(jobs[9].seed, 14);
        assert!(jobs[..50].iter().all(|j| j.kind == ModelKind::Gcn));
    }

    #[test]
    fn rejects_out_of_range_depth_unless_allowed() {
        let mut c = small_config();
        c.layers = vec![8];
        assert!(c.validate().is_err());
        c.any_depth = true;
        assert!(c.validate().is_ok());
        c.runs = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn overrides_apply_per_model() {
        let mut c = small_config();
        let mut o = ModelOverride::default();
        o.set("omega", "fixed:2").unwrap();
        o.set("dfs_length", "3").unwrap();
        c.overrides.insert(ModelKind::D2gcn, o);
        for j in c.jobs(&ModelOverride::default()) {
            if j.kind == ModelKind::D2gcn {
                assert_eq!(j.omega, OmegaSpec::Fixed(2.0));
                assert_eq!(j.dfs_length, DfsLength::Fixed(3));
            } else {
                assert_eq!(j.omega, OmegaSpec::Trainable);
            }
        }
        assert!(ModelOverride::default().set("lr", "1").is_err());
    }

    #[test]
    fn sweep_writes_sorted_reproducible_outputs() {
        let g = generate_sbm(&SbmConfig::new(2, 10, 0.6, 0.1, 0)).unwrap();
        let c = small_config();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let SweepReport::Single(outcome) = run_sweep_on(&g, &c, a.path()).unwrap() else {
            panic!("expected a single sweep");
        };
        run_sweep_on(&g, &c, b.path()).unwrap();
        let csv = fs::read(a.path().join("results.csv")).unwrap();
        assert_eq!(csv, fs::read(b.path().join("results.csv")).unwrap());

        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(RESULTS_HEADER));
        let keys: Vec<(String, String, String)> = lines
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].to_string(), f[1].to_string(), f[2].to_string())
            })
            .collect();
        assert_eq!(keys.len(), 2 * 2 * 2 * 3);
        assert_eq!(keys[0], ("gcn".into(), "2".into(), "5".into()));
        assert_eq!(
            keys.last().unwrap(),
            &("d2gcn".into(), "3".into(), "6".into())
        );
        assert_eq!(outcome.summary.len(), 4);
        let md = fs::read_to_string(a.path().join("summary.md")).unwrap();
        assert_eq!(
            md.lines()
                .filter(|l| l.starts_with("| gcn") || l.starts_with("| d2gcn"))
                .count(),
            4
        );
    }

    #[test]
    fn sensitivity_mode_writes_a_table_per_value() {
        let g = generate_sbm(&SbmConfig::new(2, 10, 0.6, 0.1, 1)).unwrap();
        let mut c = small_config();
        c.models = vec![ModelKind::D2gcn];
        c.layers = vec![2];
        c.runs = 1;
        c.sweep = Some("dfs_length=2..3".parse().unwrap());
        let dir = tempfile::tempdir().unwrap();
        let report = run_sweep_on(&g, &c, dir.path()).unwrap();
        assert_eq!(report.outcomes().len(), 2);
        assert!(dir.path().join("dfs_length=2/results.csv").exists());
        let csv = fs::read_to_string(dir.path().join("sensitivity.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn failures_are_isolated() {
        let mut g = generate_sbm(&SbmConfig::new(2, 10, 0.6, 0.1, 2)).unwrap();
        let mut c = small_config();
        c.models = vec![ModelKind::Gcn];
        c.layers = vec![2];
        c.runs = 1;
        g.features.as_mut_slice()[0] = f64::NAN;
        let dir = tempfile::tempdir().unwrap();
        let report = run_sweep_on(&g, &c, dir.path()).unwrap();
        assert_eq!(report.failure_fraction(), 1.0);
        let md = fs::read_to_string(dir.path().join("summary.md")).unwrap();
        assert!(md.contains("Failed runs"));
        assert!(md.contains("non-finite activations at epoch 0"), "{md}");
    }

    #[test]
    fn mean_std_of_small_samples() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
