use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use sgfcf::dataset::{ingest, split, IngestFormat, InteractionDataset, SplitConfig, SplitManifest};
use sgfcf::eval::{
    axis, evaluate, frequency_sweep, grid_search, write_grid_csv, write_sweep_csv, EvalContext, EvalTarget, GridSpec,
    BETA_STEP, EPSILON_STEP, GAMMA_STEP, ALPHA_STEP,
};
use sgfcf::graph::{g2n_normalize, BipartiteGraph, G2NConfig, NormalizedMatrix, DENSE_CAP};
use sgfcf::model::{write_recommendations, SgfcfConfig, SgfcfModel};
use sgfcf::spectral::{dense_svd, truncated_svd, SpectrumStats, TruncatedSpectrum};
use sgfcf::theory;

#[derive(Parser)]
#[command(name = "sgfcf", version, about = "Training-free spectral graph filtering recommender")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read an interaction file and report its size.
    Ingest(RunArgs),
    /// Split interactions into train/validation/test and write a manifest.
    Split(RunArgs),
    /// Fit on train and write top-k recommendations for every user.
    Fit(RunArgs),
    /// Fit on train and report test metrics.
    Eval(RunArgs),
    /// Evaluate nested bands of singular components.
    Sweep(RunArgs),
    /// Grid search on validation, report the winner on test.
    Grid(RunArgs),
    /// Export singular values and the captured-energy curve.
    Spectrum(RunArgs),
    /// Run the numerical checks of the spectral identities.
    TheoryCheck(RunArgs),
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// Interaction file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Split manifest written by `split`; replaces --data.
    #[arg(long)]
    split: Option<PathBuf>,
    /// tsv, csv or lists.
    #[arg(long)]
    format: Option<String>,
    /// Train ratio.
    #[arg(long)]
    x: Option<f64>,
    /// Validation ratio.
    #[arg(long)]
    val: Option<f64>,
    #[arg(long = "K")]
    k_components: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<usize>,
    /// Ranking cutoff for metrics and recommendation lists.
    #[arg(long = "k")]
    metric_k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 = all available.
    #[arg(long)]
    threads: Option<usize>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parent directory for run outputs.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
}

/// Optional grid axes; missing axes default to one step either side of the base value.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
struct GridAxes {
    alpha: Option<Vec<f64>>,
    epsilon: Option<Vec<f64>>,
    #[serde(rename = "K")]
    k: Option<Vec<usize>>,
    beta: Option<Vec<f64>>,
    beta1: Option<Vec<f64>>,
    beta2: Option<Vec<f64>>,
    gamma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunConfig {
    data: Option<PathBuf>,
    split_manifest: Option<PathBuf>,
    format: IngestFormat,
    split: SplitConfig,
    model: SgfcfConfig,
    metric_k: usize,
    threads: usize,
    grid: GridAxes,
    /// Band upper limits for `sweep`; doubling from 1 when absent.
    sweep_bands: Option<Vec<usize>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            split_manifest: None,
            format: IngestFormat::TsvPairs,
            split: SplitConfig {
                train_ratio: 0.8,
                val_ratio: 0.0,
                seed: 42,
                mode: Default::default(),
            },
            model: SgfcfConfig::default(),
            metric_k: 10,
            threads: 0,
            grid: GridAxes::default(),
            sweep_bands: None,
        }
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

fn resolve(args: &RunArgs) -> Result<RunConfig> {
    let mut value = serde_json::to_value(RunConfig::default())?;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let over: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        merge(&mut value, over);
    }
    let mut cfg: RunConfig = serde_json::from_value(value).context("invalid config file")?;
    let m = &mut cfg.model;
    if let Some(v) = &args.data {
        cfg.data = Some(v.clone());
    }
    if let Some(v) = &args.split {
        cfg.split_manifest = Some(v.clone());
    }
    if let Some(v) = &args.format {
        cfg.format = v.parse()?;
    }
    if let Some(v) = args.x {
        cfg.split.train_ratio = v;
    }
    if let Some(v) = args.val {
        cfg.split.val_ratio = v;
    }
    if let Some(v) = args.seed {
        cfg.split.seed = v;
        m.svd.seed = v;
    }
    if let Some(v) = args.k_components {
        m.k = v;
    }
    if let Some(v) = args.alpha {
        m.g2n.alpha = v;
    }
    if let Some(v) = args.epsilon {
        m.g2n.epsilon = v;
    }
    if let Some(v) = args.beta {
        m.igf.beta = v;
        // a lone --beta means one shared exponent
        if args.beta1.is_none() && args.beta2.is_none() {
            m.igf.beta1 = v;
            m.igf.beta2 = v;
        }
    }
    if let Some(v) = args.beta1 {
        m.igf.beta1 = v;
    }
    if let Some(v) = args.beta2 {
        m.igf.beta2 = v;
    }
    if let Some(v) = args.gamma {
        m.gamma = v;
    }
    if let Some(v) = args.delta {
        m.delta = v;
    }
    if let Some(v) = args.metric_k {
        cfg.metric_k = v;
    }
    if let Some(v) = args.threads {
        cfg.threads = v;
    }
    cfg.split.validate()?;
    cfg.model.validate()?;
    if cfg.metric_k == 0 {
        bail!(sgfcf::Error::Config {
            key: "k",
            reason: "must be >= 1".into()
        });
    }
    Ok(cfg)
}

/// Output directory named by the hash of the command and resolved config.
fn run_dir(out: &Path, command: &str, cfg: &RunConfig) -> Result<PathBuf> {
    let canonical = serde_json::to_vec(&json!({ "command": command, "config": cfg }))?;
    let digest = hex::encode(Sha256::digest(&canonical));
    let dir = out.join(format!("{command}-{}", &digest[..16]));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let manifest = json!({ "command": command, "config": cfg, "seed": cfg.split.seed, "config_sha256": digest });
    write_json(&dir.join("run.json"), &manifest)?;
    Ok(dir)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn csv_file(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn load(cfg: &RunConfig) -> Result<InteractionDataset> {
    if let Some(path) = &cfg.split_manifest {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let manifest: SplitManifest = serde_json::from_str(&text)?;
        return Ok(InteractionDataset::from_manifest(&manifest)?);
    }
    let Some(path) = &cfg.data else {
        bail!(sgfcf::Error::Config {
            key: "data",
            reason: "--data or --split is required".into()
        });
    };
    let log = ingest(path, cfg.format)?;
    Ok(split(&log, &cfg.split)?)
}

fn spectrum_of(norm: &NormalizedMatrix, cfg: &SgfcfConfig) -> Result<TruncatedSpectrum> {
    let max = norm.n_users().min(norm.n_items());
    if cfg.k > max {
        bail!(sgfcf::Error::KTooLarge { k: cfg.k, max });
    }
    if cfg.k == max && norm.n_users().max(norm.n_items()) <= DENSE_CAP {
        return Ok(dense_svd(norm)?.truncate(cfg.k));
    }
    Ok(truncated_svd(norm, &cfg.svd.params(cfg.k))?)
}

fn report(dir: &Path, name: &str, cfg: &RunConfig, body: Value) -> Result<()> {
    let mut value = json!({ "config": cfg, "seed": cfg.split.seed });
    merge(&mut value, body);
    write_json(&dir.join(name), &value)?;
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn default_axes(cfg: &RunConfig) -> GridSpec {
    let b = cfg.model;
    let g = &cfg.grid;
    let around = |axis_vals: &Option<Vec<f64>>, center: f64, step: f64, lo: f64, hi: f64| {
        axis_vals.clone().unwrap_or_else(|| axis(center, step, 1, lo, hi))
    };
    GridSpec {
        alpha: around(&g.alpha, b.g2n.alpha, ALPHA_STEP, 0.0, f64::MAX),
        epsilon: around(&g.epsilon, b.g2n.epsilon, EPSILON_STEP, -0.5, 0.0),
        k: g.k.clone().unwrap_or(vec![b.k]),
        beta: around(&g.beta, b.igf.beta, BETA_STEP, f64::MIN, f64::MAX),
        beta1: g.beta1.clone().unwrap_or(vec![b.igf.beta1]),
        beta2: g.beta2.clone().unwrap_or(vec![b.igf.beta2]),
        gamma: around(&g.gamma, b.gamma, GAMMA_STEP, 0.0, f64::MAX),
        ..GridSpec::single(b, cfg.metric_k)
    }
}

fn run(command: Command) -> Result<ExitCode> {
    let (name, args) = match &command {
        Command::Ingest(a) => ("ingest", a),
        Command::Split(a) => ("split", a),
        Command::Fit(a) => ("fit", a),
        Command::Eval(a) => ("eval", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Grid(a) => ("grid", a),
        Command::Spectrum(a) => ("spectrum", a),
        Command::TheoryCheck(a) => ("theory-check", a),
    };
    let cfg = resolve(args)?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .context("configuring worker threads")?;
    let dir = run_dir(&args.out, name, &cfg)?;

    match command {
        Command::Ingest(_) => {
            let Some(path) = &cfg.data else {
                bail!(sgfcf::Error::Config {
                    key: "data",
                    reason: "--data is required".into()
                });
            };
            let log = ingest(path, cfg.format)?;
            let body = json!({
                "interactions": log.len(),
                "users": log.distinct_users(),
                "items": log.distinct_items(),
            });
            report(&dir, "ingest.json", &cfg, body)?;
        }
        Command::Split(_) => {
            let ds = load(&cfg)?;
            write_json(&dir.join("split.json"), &ds.to_manifest())?;
            let body = json!({
                "users": ds.n_users,
                "items": ds.n_items,
                "train": ds.train.len(),
                "val": ds.val.len(),
                "test": ds.test.len(),
                "manifest": dir.join("split.json"),
            });
            report(&dir, "split_report.json", &cfg, body)?;
        }
        Command::Fit(_) => {
            let ds = load(&cfg)?;
            let model = SgfcfModel::fit(&ds, &cfg.model)?;
            let lists = (0..ds.n_users)
                .map(|u| model.recommend(u, cfg.metric_k, true))
                .collect::<sgfcf::Result<Vec<_>>>()?;
            write_recommendations(csv_file(&dir.join("recommendations.csv"))?, &lists)?;
            report(&dir, "model.json", &cfg, json!({ "model": model.summary() }))?;
        }
        Command::Eval(_) => {
            let ds = load(&cfg)?;
            let model = SgfcfModel::fit(&ds, &cfg.model)?;
            let start = std::time::Instant::now();
            let m = evaluate(&model, &ds, cfg.metric_k)?;
            let body = json!({
                "k": m.k,
                "recall": m.recall,
                "ndcg": m.ndcg,
                "users_evaluated": m.users_evaluated,
                "fit_seconds": model.fit_seconds(),
                "eval_seconds": start.elapsed().as_secs_f64(),
            });
            report(&dir, "report.json", &cfg, body)?;
        }
        Command::Sweep(_) => {
            let ds = load(&cfg)?;
            let graph = BipartiteGraph::build(&ds)?;
            let spectrum = spectrum_of(&g2n_normalize(&graph, &cfg.model.g2n), &cfg.model)?;
            let bands = cfg.sweep_bands.clone().unwrap_or_else(|| {
                let mut v: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2))
                    .take_while(|&k| k < spectrum.len())
                    .collect();
                v.push(spectrum.len());
                v
            });
            let ctx = EvalContext::new(&ds, EvalTarget::Test);
            let n_freq = graph.n_users().min(graph.n_items());
            let points = frequency_sweep(&spectrum, &ctx, &bands, cfg.metric_k, n_freq)?;
            write_sweep_csv(csv_file(&dir.join("sweep.csv"))?, &points)?;
            report(&dir, "sweep.json", &cfg, json!({ "points": points }))?;
        }
        Command::Grid(_) => {
            let ds = load(&cfg)?;
            let result = grid_search(&ds, &default_axes(&cfg))?;
            write_grid_csv(csv_file(&dir.join("grid.csv"))?, &result.rows)?;
            let body = json!({
                "grid_points": result.rows.len(),
                "best": result.best,
                "best_validation": result.best_validation,
                "test": result.test,
            });
            report(&dir, "grid.json", &cfg, body)?;
        }
        Command::Spectrum(_) => {
            let ds = load(&cfg)?;
            let graph = BipartiteGraph::build(&ds)?;
            let norm = g2n_normalize(&graph, &cfg.model.g2n);
            let spectrum = spectrum_of(&norm, &cfg.model)?;
            let reference = if cfg.model.g2n.alpha != 0.0 {
                let base = G2NConfig {
                    alpha: 0.0,
                    ..cfg.model.g2n
                };
                Some(spectrum_of(&g2n_normalize(&graph, &base), &cfg.model)?)
            } else {
                None
            };
            let stats = SpectrumStats::compute(&spectrum, norm.frobenius_sq(), reference.as_ref())?;
            spectrum.write_csv(csv_file(&dir.join("spectrum.csv"))?)?;
            stats.write_csv(csv_file(&dir.join("energy.csv"))?)?;
            let body = json!({
                "components": spectrum.len(),
                "frobenius_sq_total": stats.frobenius_sq_total,
                "appro_at_K": stats.appro_curve.last(),
            });
            report(&dir, "spectrum.json", &cfg, body)?;
        }
        Command::TheoryCheck(_) => {
            let reports = theory::run_all(cfg.split.seed)?;
            for r in &reports {
                write_json(&dir.join(format!("{}.json", r.check_name)), &json!({ "seed": cfg.split.seed, "report": r }))?;
            }
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.check_name.as_str()).collect();
            let body = json!({ "checks": reports, "passed": failed.is_empty(), "failed": failed });
            report(&dir, "theory_summary.json", &cfg, body)?;
            if !failed.is_empty() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
