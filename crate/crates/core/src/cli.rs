//! Command-line front end. Every subcommand writes a run manifest next to its
//! main output.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::benefit::{BenefitSpec, DecisionRecord, Mode};
use crate::dataio::{
    interpolate_missing, median_downsample, trim_artifacts, LabeledDataset, NormStats, DEFAULT_LEAD_SIGMA,
    DEFAULT_TRAIL_EPS,
};
use crate::error::{Error, Result};
use crate::eval::{
    bench_step_latency, bench_training_scaling, default_positive, evaluate, write_latency_csv,
    write_metrics_csv, write_pareto_csv, write_scaling_csv, write_tolerance_csv, SweepPoint,
};
use crate::neural::{AttentionMode, ModelConfig, ModelParams};
use crate::stream::{run_decisions, DecisionPolicy, ReplayOptions, StreamRun};
use crate::synth::{synth_outcome_dataset, write_synth, SynthConfig};
use crate::training::{
    grid_search, load_bundle, save_bundle, train_bundle, GridConfig, TrainConfig, TrainedBundle,
};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "EARLY_BENEFIT_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "early-benefit", version, about = "Benefit-aware early time-series classification")]
struct Cli {
    /// Worker threads for training and sweeps.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a data file: interpolate, trim, downsample, normalize (in the given order).
    Preprocess(PreprocessArgs),
    /// Train one bundle.
    Train(TrainArgs),
    /// Train every point of a hyperparameter grid and rank them.
    Sweep(SweepArgs),
    /// Replay a data file through a bundle, one observation at a time.
    Stream(StreamArgs),
    /// Score a decisions file.
    Evaluate(EvaluateArgs),
    /// Pareto front and tolerance table from a metrics file.
    Pareto(ParetoArgs),
    /// Runtime benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Generate the synthetic outcome dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Fill missing values by linear interpolation.
    #[arg(long)]
    interpolate: bool,
    /// Trim artifacts: `lead_sigma,trail_eps`.
    #[arg(long, value_name = "SIGMA,EPS", num_args = 0..=1, default_missing_value = "")]
    trim: Option<String>,
    /// Median downsampling window.
    #[arg(long, value_name = "W")]
    downsample: Option<usize>,
    /// Fit `[0, 1]` scaling on this file (after the same earlier steps) and apply it.
    #[arg(long, value_name = "TRAIN")]
    normalize_with: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenefitArgs {
    /// Benefit spec JSON.
    #[arg(long, conflicts_with = "ms_ratio")]
    benefit: Option<PathBuf>,
    /// Symmetric cost with s = 1 and this M.
    #[arg(long)]
    ms_ratio: Option<f64>,
    #[arg(long, default_value = "type")]
    mode: Mode,
    /// Default (favorable) label name in outcome mode; the first label otherwise.
    #[arg(long)]
    default_label: Option<String>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    benefit: BenefitArgs,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    delta_frac: Option<f64>,
    /// Epochs without validation improvement before stopping (0 disables).
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    attention: Option<AttentionMode>,
    /// Keep inputs as they are instead of fitting `[0, 1]` scaling.
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Training file; overrides `data` in the sweep configuration.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Sweep configuration JSON.
    #[arg(long)]
    grids: PathBuf,
    /// Also evaluate every point on this file; overrides `test` in the configuration.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StreamArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// CSV of attention weights per evaluation tick.
    #[arg(long)]
    attention_export: Option<PathBuf>,
    /// Append per-tick benefit estimates to the decisions file.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    decisions: PathBuf,
    #[arg(long)]
    benefit: PathBuf,
    #[arg(long)]
    positive_class: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ParetoArgs {
    #[arg(long)]
    metrics: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    tolerance_out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.75, 1.0])]
    tols: Vec<f64>,
    #[arg(long, default_value = "data")]
    label: String,
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Training time against number of training series.
    Scaling(ScalingArgs),
    /// Per-observation decision latency.
    Latency(LatencyArgs),
}

#[derive(Debug, Args)]
struct ScalingArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    benefit: BenefitArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.4, 0.6, 0.8, 1.0])]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    /// Timed runs per fraction; the median is reported.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LatencyArgs {
    /// Trained bundle; without it a randomly initialized model is timed.
    #[arg(long)]
    bundle: Option<PathBuf>,
    #[arg(long, default_value_t = 107)]
    dim: usize,
    #[arg(long, default_value_t = 32)]
    hidden: usize,
    #[arg(long, default_value_t = 500)]
    length: usize,
    #[arg(long, default_value = "last-state-only")]
    attention: AttentionMode,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 24)]
    min_len: usize,
    #[arg(long, default_value_t = 96)]
    max_len: usize,
    #[arg(long, default_value_t = 1.0)]
    drift: f64,
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "synth")]
    stem: String,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

/// Everything needed to understand (and replay) one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_seconds: f64,
}

/// Sweep configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub test: Option<PathBuf>,
    pub mode: Mode,
    #[serde(default)]
    pub default_label: Option<String>,
    /// Absolute `M/s` values; alternatively give `ms_factors` relative to the longest series.
    #[serde(default)]
    pub ms_ratios: Vec<f64>,
    #[serde(default)]
    pub ms_factors: Vec<f64>,
    pub learning_rates: Vec<f64>,
    pub hidden_dims: Vec<usize>,
    #[serde(default = "default_deltas")]
    pub delta_fracs: Vec<f64>,
    #[serde(default)]
    pub train: TrainConfig,
}

fn default_deltas() -> Vec<f64> {
    vec![0.5]
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let parsed = Cli::command()
        .try_get_matches_from(&argv)
        .and_then(|m| Ok((Cli::from_arg_matches(&m)?, step_order(&m))));
    let (cli, order) = match parsed {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli, order, argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error [{}]: {}", e.category(), e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, order: Vec<Step>, argv: Vec<String>) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::arg("--workers must be >= 1"));
        }
        // a second call within one process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    let mut m = RunManifest {
        subcommand: String::new(),
        argv,
        config: serde_json::Value::Null,
        inputs: Vec::new(),
        outputs: Vec::new(),
        seed: None,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_seconds: 0.0,
    };
    let manifest_path = match cli.command {
        Command::Preprocess(a) => cmd_preprocess(a, &order, &mut m)?,
        Command::Train(a) => cmd_train(a, &mut m)?,
        Command::Sweep(a) => cmd_sweep(a, &mut m)?,
        Command::Stream(a) => cmd_stream(a, &mut m)?,
        Command::Evaluate(a) => cmd_evaluate(a, &mut m)?,
        Command::Pareto(a) => cmd_pareto(a, &mut m)?,
        Command::Bench(BenchCommand::Scaling(a)) => cmd_scaling(a, &mut m)?,
        Command::Bench(BenchCommand::Latency(a)) => cmd_latency(a, &mut m)?,
        Command::Synth(a) => cmd_synth(a, &mut m)?,
    };
    m.wall_seconds = start.elapsed().as_secs_f64();
    write_json(&manifest_path, &m)
}

fn manifest_beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Persistence(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::Persistence(format!("{}: {e}", path.display())))
}

fn read_input(path: &Path) -> Result<LabeledDataset> {
    if !path.exists() {
        return Err(Error::arg(format!("input file {} does not exist", path.display())));
    }
    LabeledDataset::load(path)
}

fn resolve_default(data: &LabeledDataset, label: Option<&str>) -> Result<usize> {
    match label {
        Some(name) => data
            .label_map()
            .index_of(name)
            .ok_or_else(|| Error::arg(format!("unknown default label `{name}`"))),
        None => Ok(0),
    }
}

fn resolve_spec(args: &BenefitArgs, data: &LabeledDataset) -> Result<BenefitSpec> {
    match (&args.benefit, args.ms_ratio) {
        (Some(p), _) => BenefitSpec::load(p),
        (None, Some(r)) => {
            let default = match args.mode {
                Mode::Outcome => Some(resolve_default(data, args.default_label.as_deref())?),
                Mode::Type => None,
            };
            BenefitSpec::from_ms_ratio(args.mode, data.num_classes(), r, default)
        }
        (None, None) => Err(Error::arg("give either --benefit or --ms-ratio")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Step {
    Interpolate,
    Trim,
    Downsample,
    NormalizeWith,
}

/// Preprocessing steps in the order their flags appear on the command line.
fn step_order(m: &ArgMatches) -> Vec<Step> {
    let Some(("preprocess", sub)) = m.subcommand() else {
        return Vec::new();
    };
    let mut steps: Vec<(usize, Step)> = [
        ("interpolate", Step::Interpolate),
        ("trim", Step::Trim),
        ("downsample", Step::Downsample),
        ("normalize_with", Step::NormalizeWith),
    ]
    .into_iter()
    .filter(|(id, _)| sub.value_source(id) == Some(clap::parser::ValueSource::CommandLine))
    .filter_map(|(id, step)| sub.index_of(id).map(|i| (i, step)))
    .collect();
    steps.sort_unstable_by_key(|(i, _)| *i);
    steps.into_iter().map(|(_, s)| s).collect()
}

fn parse_trim(spec: &str) -> Result<(f64, f64)> {
    if spec.trim().is_empty() {
        return Ok((DEFAULT_LEAD_SIGMA, DEFAULT_TRAIL_EPS));
    }
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::arg(format!("--trim expects `lead_sigma,trail_eps`, got `{spec}`")))
    };
    match parts.as_slice() {
        [sigma] => Ok((num(sigma)?, DEFAULT_TRAIL_EPS)),
        [sigma, eps] => Ok((num(sigma)?, num(eps)?)),
        _ => Err(Error::arg(format!("--trim expects `lead_sigma,trail_eps`, got `{spec}`"))),
    }
}

fn cmd_preprocess(a: PreprocessArgs, order: &[Step], m: &mut RunManifest) -> Result<PathBuf> {
    m.subcommand = "preprocess".into();
    m.inputs.push(a.input.clone());
    let mut data = read_input(&a.input)?;
    let trim = a.trim.as_deref().map(parse_trim).transpose()?;
    let mut stats = None;
    // the reference file for normalization goes through the same earlier steps
    let mut reference = match &a.normalize_with {
        Some(p) => {
            m.inputs.push(p.clone());
            Some(read_input(p)?)
        }
        None => None,
    };
    for &step in order {
        let apply = |d: &LabeledDataset| -> Result<LabeledDataset> {
            match step {
                Step::Interpolate => d.try_map(interpolate_missing),
                Step::Trim => {
                    let (sigma, eps) = trim.unwrap_or((DEFAULT_LEAD_SIGMA, DEFAULT_TRAIL_EPS));
                    d.try_map(|i| trim_artifacts(i, sigma, eps))
                }
                Step::Downsample => d.try_map(|i| median_downsample(i, a.downsample.unwrap_or(1))),
                Step::NormalizeWith => Ok(d.clone()),
            }
        };
        if step == Step::NormalizeWith {
            let s = NormStats::fit(reference.as_ref().unwrap_or(&data))?;
            data = s.apply(&data)?;
            stats = Some(s);
            continue;
        }
        data = apply(&data)?;
        if let Some(r) = reference.as_mut() {
            *r = apply(r)?;
        }
    }
    data.save(&a.out)?;
    m.outputs.push(a.out.clone());
    if let Some(s) = &stats {
        let p = a.out.with_extension("norm.json");
        write_json(&p, s)?;
        m.outputs.push(p);
    }
    m.config = json!({ "steps": order, "trim": trim, "downsample": a.downsample });
    Ok(manifest_beside(&a.out))
}

fn cmd_train(a: TrainArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.subcommand = "train".into();
    m.inputs.push(a.data.clone());
    let data = read_input(&a.data)?;
    let spec = resolve_spec(&a.benefit, &data)?;
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        learning_rate: a.lr.unwrap_or(d.learning_rate),
        hidden_dim: a.hidden.unwrap_or(d.hidden_dim),
        delta_frac: a.delta_frac.unwrap_or(d.delta_frac),
        epochs: a.epochs.unwrap_or(d.epochs),
        batch_size: a.batch_size.unwrap_or(d.batch_size),
        stride: a.stride.unwrap_or(d.stride),
        seed: a.seed.unwrap_or(d.seed),
        patience: a.patience.map_or(d.patience, |p| (p > 0).then_some(p)),
        attention: a.attention.unwrap_or(d.attention),
        normalize: !a.no_normalize,
        ..d
    };
    let bundle = train_bundle(&data, &spec, &cfg)?;
    if let Some(r) = &bundle.val_report {
        info!("validation accuracy {:.4}, tardiness {:.4}", r.accuracy, r.tardiness);
    }
    save_bundle(&bundle, &a.out)?;
    m.outputs.push(a.out.clone());
    m.seed = Some(cfg.seed);
    m.config = json!({ "train": cfg, "benefit": spec });
    Ok(manifest_beside(&a.out))
}

const RANK_HEADER: [&str; 10] = [
    "id",
    "ms_ratio",
    "learning_rate",
    "hidden_dim",
    "delta_frac",
    "val_accuracy",
    "val_tardiness",
    "distance",
    "rank",
    "error",
];

fn cmd_sweep(a: SweepArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.subcommand = "sweep".into();
    m.inputs.push(a.grids.clone());
    let text = fs::read_to_string(&a.grids)
        .map_err(|e| Error::arg(format!("cannot read {}: {e}", a.grids.display())))?;
    let mut sc: SweepConfig =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", a.grids.display())))?;
    if a.data.is_some() {
        sc.data = a.data.clone();
    }
    if a.test.is_some() {
        sc.test = a.test.clone();
    }
    let data_path = sc
        .data
        .clone()
        .ok_or_else(|| Error::arg("no training data: give --data or `data` in the sweep configuration"))?;
    m.inputs.push(data_path.clone());
    let data = read_input(&data_path)?;
    let ms_ratios = if sc.ms_ratios.is_empty() {
        sc.ms_factors.iter().map(|f| f * data.max_len() as f64).collect()
    } else {
        sc.ms_ratios.clone()
    };
    let grid = GridConfig {
        ms_ratios,
        learning_rates: sc.learning_rates.clone(),
        hidden_dims: sc.hidden_dims.clone(),
        delta_fracs: sc.delta_fracs.clone(),
    };
    let default = match sc.mode {
        Mode::Outcome => Some(resolve_default(&data, sc.default_label.as_deref())?),
        Mode::Type => None,
    };
    let results = grid_search(&data, sc.mode, default, &grid, &sc.train)?;

    fs::create_dir_all(&a.out)?;
    let test = sc.test.clone();
    if let Some(p) = &test {
        m.inputs.push(p.clone());
    }
    let mut ranked = csv::Writer::from_path(a.out.join("ranking.csv"))?;
    ranked.write_record(RANK_HEADER)?;
    let mut val_points = Vec::new();
    let mut test_points = Vec::new();
    for r in &results {
        let id = r.point.id();
        let mut row = vec![
            id.clone(),
            r.point.ms_ratio.to_string(),
            r.point.learning_rate.to_string(),
            r.point.hidden_dim.to_string(),
            r.point.delta_frac.to_string(),
        ];
        match &r.outcome {
            Ok((bundle, report)) => {
                row.extend([
                    report.accuracy.to_string(),
                    report.tardiness.to_string(),
                    r.distance.map_or(String::new(), |d| d.to_string()),
                    r.rank.map_or(String::new(), |k| k.to_string()),
                    String::new(),
                ]);
                let path = a.out.join(format!("{id}.bundle.json"));
                save_bundle(bundle, &path)?;
                m.outputs.push(path);
                val_points.push(SweepPoint::from_report(id.clone(), report.clone()));
                if let Some(tp) = &test {
                    let raw = LabeledDataset::load_with_map(tp, &bundle.label_map)?;
                    let report = bundle.evaluate_prepared(&bundle.prepare(&raw)?)?;
                    test_points.push(SweepPoint::from_report(id, report));
                }
            }
            Err(e) => row.extend([String::new(), String::new(), String::new(), String::new(), e.clone()]),
        }
        ranked.write_record(&row)?;
    }
    ranked.flush()?;
    m.outputs.push(a.out.join("ranking.csv"));
    write_metrics_csv(a.out.join("val_metrics.csv"), &val_points)?;
    write_pareto_csv(a.out.join("val_pareto.csv"), &val_points)?;
    m.outputs.push(a.out.join("val_metrics.csv"));
    m.outputs.push(a.out.join("val_pareto.csv"));
    if !test_points.is_empty() {
        write_metrics_csv(a.out.join("test_metrics.csv"), &test_points)?;
        write_pareto_csv(a.out.join("test_pareto.csv"), &test_points)?;
        let label = data_path.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
        write_tolerance_csv(a.out.join("test_tolerance.csv"), &label, &test_points, &[0.5, 0.75, 1.0])?;
        for f in ["test_metrics.csv", "test_pareto.csv", "test_tolerance.csv"] {
            m.outputs.push(a.out.join(f));
        }
    }
    m.seed = Some(sc.train.seed);
    m.config = serde_json::to_value(&sc).map_err(|e| Error::Persistence(e.to_string()))?;
    Ok(a.out.join("manifest.json"))
}

fn decisions_header(bundle: &TrainedBundle, trace_len: usize) -> Vec<String> {
    let mut h: Vec<String> = ["id", "truth", "predicted", "tick", "len"].map(String::from).to_vec();
    for t in 1..=trace_len {
        for mdl in &bundle.models {
            h.push(format!("b{}_t{t}", mdl.class));
        }
    }
    h
}

fn cmd_stream(a: StreamArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.subcommand = "stream".into();
    m.inputs.push(a.bundle.clone());
    m.inputs.push(a.data.clone());
    let bundle = load_bundle(&a.bundle)?;
    let raw = LabeledDataset::load_with_map(&a.data, &bundle.label_map)?;
    let data = bundle.prepare(&raw)?;
    let opts = ReplayOptions {
        trace: a.trace,
        attention: a.attention_export.is_some(),
    };
    if opts.attention && bundle.policy.attention == AttentionMode::LastStateOnly {
        return Err(Error::Unsupported("attention export needs a full-attention bundle".into()));
    }
    let runs = run_decisions(&bundle, &data, opts)?;
    write_decisions(&a.out, &bundle, &runs)?;
    m.outputs.push(a.out.clone());
    if let Some(p) = &a.attention_export {
        let mut w = csv::Writer::from_path(p)?;
        let max_len = data.max_len();
        let mut header: Vec<String> = ["id", "class", "eval_tick"].map(String::from).to_vec();
        header.extend((1..=max_len).map(|t| format!("t{t}")));
        w.write_record(&header)?;
        for r in &runs {
            for (tick, class, alpha) in &r.attention {
                let mut row = vec![r.record.id.clone(), class.to_string(), tick.to_string()];
                row.extend(alpha.iter().map(|v| v.to_string()));
                row.resize(header.len(), String::new());
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        m.outputs.push(p.clone());
    }
    m.config = json!({ "policy": bundle.policy, "trace": a.trace });
    Ok(manifest_beside(&a.out))
}

fn write_decisions(path: &Path, bundle: &TrainedBundle, runs: &[StreamRun]) -> Result<()> {
    let trace_len = runs.iter().map(|r| r.trace.len()).max().unwrap_or(0);
    let header = decisions_header(bundle, trace_len);
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&header)?;
    for r in runs {
        let d = &r.record;
        let mut row = vec![
            d.id.clone(),
            d.truth.to_string(),
            d.predicted.map_or(String::new(), |p| p.to_string()),
            d.tick.to_string(),
            d.len.to_string(),
        ];
        for tick in &r.trace {
            row.extend(tick.iter().map(|v| v.to_string()));
        }
        row.resize(header.len(), String::new());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the first five columns of a decisions file.
pub fn read_decisions(path: &Path) -> Result<Vec<DecisionRecord>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::arg(format!("cannot read decisions {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let field = |k: usize| row.get(k).unwrap_or("").trim();
        let num = |k: usize| -> Result<usize> {
            field(k)
                .parse()
                .map_err(|_| Error::Format(format!("decisions row {}: bad value `{}` in column {}", i + 2, field(k), k + 1)))
        };
        out.push(DecisionRecord {
            id: field(0).to_string(),
            truth: num(1)?,
            predicted: if field(2).is_empty() { None } else { Some(num(2)?) },
            tick: num(3)?,
            len: num(4)?,
        });
    }
    Ok(out)
}

fn cmd_evaluate(a: EvaluateArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.subcommand = "evaluate".into();
    m.inputs.push(a.decisions.clone());
    m.inputs.push(a.benefit.clone());
    let records = read_decisions(&a.decisions)?;
    let spec = BenefitSpec::load(&a.benefit)?;
    let positive = a.positive_class.unwrap_or_else(|| default_positive(&spec));
    let report = evaluate(&records, &spec, positive)?;
    let id = a.decisions.file_stem().map_or("decisions".into(), |s| s.to_string_lossy().into_owned());
    write_metrics_csv(&a.out, &[SweepPoint::from_report(id, report.clone())])?;
    m.outputs.push(a.out.clone());
    m.config = json!({ "positive_class": positive, "report": report });
    Ok(manifest_beside(&a.out))
}

/// Reads `id`, `accuracy` and `tardiness` columns of a metrics file.
pub fn read_sweep_points(path: &Path) -> Result<Vec<SweepPoint>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::arg(format!("cannot read metrics {}: {e}", path.display())))?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("{}: missing column `{name}`", path.display())))
    };
    let (ci, ca, ct) = (col("id")?, col("accuracy")?, col("tardiness")?);
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let num = |k: usize| -> Result<f64> {
            row.get(k)
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::Format(format!("metrics row {}: bad number in column {}", i + 2, k + 1)))
        };
        out.push(SweepPoint::new(row.get(ci).unwrap_or(""), num(ct)?, num(ca)?));
    }
    if out.is_empty() {
        return Err(Error::Format(format!("{}: no points", path.display())));
    }
    Ok(out)
}

fn cmd_pareto(a: ParetoArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.subcommand = "pareto".into();
    m.inputs.push(a.metrics.clone());
    let points = read_sweep_points(&a.metrics)?;
    write_pareto_csv(&a.out, &points)?;
    m.outputs.push(a.out.clone());
    if let Some(p) = &a.tolerance_out {
        if a.tols.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::arg("tolerances must lie in (0, 1]"));
        }
        write_tolerance_csv(p, &a.label, &points, &a.tols)?;
        m.outputs.push(p.clone());
    }
    m.config = json!({ "tols": a.tols });
    Ok(manifest_beside(&a.out))
}

fn cmd_scaling(a: ScalingArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.subcommand = "bench scaling".into();
    m.inputs.push(a.data.clone());
    let data = read_input(&a.data)?;
    let spec = resolve_spec(&a.benefit, &data)?;
    let cfg = TrainConfig {
        epochs: a.epochs,
        hidden_dim: a.hidden,
        seed: a.seed,
        patience: None,
        ..TrainConfig::default()
    };
    let report = bench_training_scaling(&data, &spec, &a.fractions, &cfg, a.repeats)?;
    write_scaling_csv(&a.out, &report)?;
    m.outputs.push(a.out.clone());
    m.seed = Some(a.seed);
    m.config = json!({ "train": cfg, "fractions": a.fractions, "repeats": a.repeats, "fit": report.fit });
    Ok(manifest_beside(&a.out))
}

fn cmd_latency(a: LatencyArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.subcommand = "bench latency".into();
    let bundle = a.bundle.as_ref().map(load_bundle).transpose()?;
    let random = match &bundle {
        Some(_) => None,
        None => {
            let cfg = ModelConfig {
                attention: a.attention,
                ..ModelConfig::new(a.dim, a.hidden)
            };
            Some(ModelParams::init(cfg, a.seed)?)
        }
    };
    let (models, policy, default, dim) = match (&bundle, &random) {
        (Some(b), _) => {
            m.inputs.push(a.bundle.clone().unwrap_or_default());
            let policy = DecisionPolicy {
                attention: a.attention,
                ..b.policy
            };
            (b.model_refs(), policy, b.spec.default_class, b.model_config.input_dim)
        }
        (None, Some(p)) => (vec![(1, p)], DecisionPolicy::outcome(a.attention), Some(0), a.dim),
        (None, None) => unreachable!("a random model is built when no bundle is given"),
    };
    let series = crate::eval::random_series(dim, a.length, a.seed)?;
    let medians = bench_step_latency(&models, policy, default, &series, a.repeats)?;
    let mode = match a.attention {
        AttentionMode::Full => "full",
        AttentionMode::LastStateOnly => "last-state-only",
    };
    write_latency_csv(&a.out, mode, &medians)?;
    m.outputs.push(a.out.clone());
    m.seed = Some(a.seed);
    m.config = json!({ "attention": a.attention, "dim": dim, "hidden": a.hidden, "length": a.length, "repeats": a.repeats });
    Ok(manifest_beside(&a.out))
}

fn cmd_synth(a: SynthArgs, m: &mut RunManifest) -> Result<PathBuf> {
    m.subcommand = "synth".into();
    let cfg = SynthConfig {
        n: a.n,
        dim: a.dim,
        min_len: a.min_len,
        max_len: a.max_len,
        drift: a.drift,
        noise: a.noise,
        seed: a.seed,
    };
    let (data, truth) = synth_outcome_dataset(&cfg)?;
    write_synth(&a.out, &a.stem, &data, &truth)?;
    m.outputs.push(a.out.join(format!("{}.jsonl", a.stem)));
    m.outputs.push(a.out.join(format!("{}.truth.json", a.stem)));
    m.seed = Some(a.seed);
    m.config = serde_json::to_value(&cfg).map_err(|e| Error::Persistence(e.to_string()))?;
    Ok(a.out.join(format!("{}.manifest.json", a.stem)))
}
