//! Metrics over decision records, Pareto fronts, tolerance tables and runtime
//! benchmarks.

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::benefit::{total_benefit, BenefitSpec, DecisionRecord, Mode};
use crate::dataio::{LabeledDataset, SeriesInstance};
use crate::error::{Error, Result};
use crate::neural::ModelParams;
use crate::stream::{DecisionPolicy, StreamState};
use crate::training::{train_bundle, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    /// For the designated positive class.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Mean of `tick / len`; undecided instances count as 1.
    pub tardiness: f64,
    pub total_benefit: f64,
    pub unclassified: usize,
}

/// Positive class for precision and recall: the first non-default class in
/// outcome mode, the last class in type mode.
pub fn default_positive(spec: &BenefitSpec) -> usize {
    match spec.mode {
        Mode::Outcome => spec.active_classes()[0],
        Mode::Type => spec.num_classes() - 1,
    }
}

/// Scores decision records. In outcome mode a record without an active label is
/// a default-class prediction; in type mode it is unclassified and counts as wrong.
pub fn evaluate(records: &[DecisionRecord], spec: &BenefitSpec, positive_class: usize) -> Result<EvalReport> {
    if records.is_empty() {
        return Err(Error::arg("no decision records to evaluate"));
    }
    if positive_class >= spec.num_classes() {
        return Err(Error::arg(format!("positive class {positive_class} out of range")));
    }
    let (mut tp, mut fp, mut fn_, mut correct, mut unclassified) = (0usize, 0usize, 0usize, 0usize, 0usize);
    let mut tardiness = 0.0;
    for r in records {
        if r.len == 0 || r.tick == 0 || r.tick > r.len {
            return Err(Error::arg(format!("record `{}`: tick {} outside 1..={}", r.id, r.tick, r.len)));
        }
        let predicted = match (r.predicted, spec.mode) {
            (Some(p), _) => Some(p),
            (None, Mode::Outcome) => spec.default_class,
            (None, Mode::Type) => {
                unclassified += 1;
                None
            }
        };
        if predicted == Some(r.truth) {
            correct += 1;
        }
        let pred_pos = predicted == Some(positive_class);
        let true_pos = r.truth == positive_class;
        match (pred_pos, true_pos) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
        tardiness += r.tick as f64 / r.len as f64;
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let n = records.len();
    Ok(EvalReport {
        n,
        precision,
        recall,
        f1,
        accuracy: ratio(correct, n),
        tardiness: tardiness / n as f64,
        total_benefit: total_benefit(spec, records)?,
        unclassified,
    })
}

/// One evaluated configuration in (tardiness, accuracy) space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub id: String,
    pub tardiness: f64,
    pub accuracy: f64,
    pub report: Option<EvalReport>,
}

impl SweepPoint {
    pub fn new(id: impl Into<String>, tardiness: f64, accuracy: f64) -> Self {
        Self {
            id: id.into(),
            tardiness,
            accuracy,
            report: None,
        }
    }

    pub fn from_report(id: impl Into<String>, report: EvalReport) -> Self {
        Self {
            id: id.into(),
            tardiness: report.tardiness,
            accuracy: report.accuracy,
            report: Some(report),
        }
    }
}

/// Indices of the points not dominated under lower tardiness / higher accuracy.
/// Points with identical coordinates are represented once (the first seen).
pub fn pareto_indices(points: &[SweepPoint]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.tardiness
            .total_cmp(&pb.tardiness)
            .then(pb.accuracy.total_cmp(&pa.accuracy))
            .then(a.cmp(&b))
    });
    let mut front = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for i in order {
        if points[i].accuracy > best {
            best = points[i].accuracy;
            front.push(i);
        }
    }
    front
}

/// The non-dominated subset, ordered by increasing tardiness.
pub fn pareto_front(points: &[SweepPoint]) -> Vec<SweepPoint> {
    pareto_indices(points).into_iter().map(|i| points[i].clone()).collect()
}

/// Front membership per point; duplicates of a front point are members too.
pub fn pareto_mask(points: &[SweepPoint]) -> Vec<bool> {
    let front = pareto_front(points);
    points
        .iter()
        .map(|p| front.iter().any(|f| f.tardiness == p.tardiness && f.accuracy == p.accuracy))
        .collect()
}

/// Best accuracy among points with mean tardiness at most `tol`.
pub fn accuracy_at_tolerance(points: &[SweepPoint], tol: f64) -> Option<f64> {
    points
        .iter()
        .filter(|p| p.tardiness <= tol)
        .map(|p| p.accuracy)
        .max_by(f64::total_cmp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `None` with fewer than two distinct abscissae.
    pub r2: Option<f64>,
}

/// Least-squares line through `(x, y)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len().min(ys.len());
    let none = LinearFit {
        slope: 0.0,
        intercept: ys.first().copied().unwrap_or(0.0),
        r2: None,
    };
    if n < 2 {
        return none;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return none;
    }
    let sxy: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys[..n].iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LinearFit {
        slope,
        intercept,
        r2: Some(r2),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub fraction: f64,
    pub n: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Fit of seconds against number of training series.
    pub fit: LinearFit,
}

/// Nested subsets: the first `ceil(frac * n)` entries of one seeded permutation.
pub fn nested_subsets(n: usize, fractions: &[f64], seed: u64) -> Result<Vec<Vec<usize>>> {
    if fractions.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::arg("fractions must be sorted ascending"));
    }
    if fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::arg("fractions must lie in (0, 1]"));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(fractions
        .iter()
        .map(|&f| {
            let k = ((f * n as f64) - 1e-9).ceil().max(2.0) as usize;
            let mut idx = perm[..k.min(n)].to_vec();
            idx.sort_unstable();
            idx
        })
        .collect())
}

/// Training wall time per data fraction, single worker, fixed epoch count.
/// Each fraction is trained `repeats` times (at least once) and the median kept.
pub fn bench_training_scaling(
    dataset: &LabeledDataset,
    spec: &BenefitSpec,
    fractions: &[f64],
    config: &TrainConfig,
    repeats: usize,
) -> Result<ScalingReport> {
    if fractions.is_empty() {
        return Err(Error::arg("no fractions to benchmark"));
    }
    let cfg = TrainConfig {
        patience: None,
        ..config.clone()
    };
    let subsets = nested_subsets(dataset.len(), fractions, config.seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut rows = Vec::with_capacity(fractions.len());
    for (&fraction, idx) in fractions.iter().zip(&subsets) {
        let sub = dataset.subset(idx)?;
        let mut times = Vec::with_capacity(repeats.max(1));
        for _ in 0..repeats.max(1) {
            let start = Instant::now();
            pool.install(|| train_bundle(&sub, spec, &cfg))?;
            times.push(start.elapsed().as_secs_f64());
        }
        rows.push(ScalingRow {
            fraction,
            n: idx.len(),
            seconds: median(&mut times),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.seconds).collect();
    Ok(ScalingReport {
        fit: linear_fit(&xs, &ys),
        rows,
    })
}

/// Uniform `[0, 1)` series used as benchmark input.
pub fn random_series(dim: usize, len: usize, seed: u64) -> Result<SeriesInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..dim * len).map(|_| rng.random::<f64>()).collect();
    SeriesInstance::new("bench", 0, dim, values)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median wall time (seconds) of each `observe` call, tick by tick.
///
/// One untimed pass warms caches, then `repeats` timed passes (at least 5) each
/// start from a fresh state.
pub fn bench_step_latency(
    models: &[(usize, &ModelParams)],
    policy: DecisionPolicy,
    default_class: Option<usize>,
    series: &SeriesInstance,
    repeats: usize,
) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::arg("latency benchmark needs a non-empty series"));
    }
    series.require_complete("latency benchmark")?;
    let repeats = repeats.max(5);
    let len = series.len();
    let mut samples = vec![Vec::with_capacity(repeats); len];
    for rep in 0..=repeats {
        let mut state = StreamState::from_models(models.to_vec(), policy, default_class)?;
        for (t, x) in series.sequence().rows().enumerate() {
            let start = Instant::now();
            std::hint::black_box(state.observe_lean(std::hint::black_box(x))?);
            let dt = start.elapsed().as_secs_f64();
            if rep > 0 {
                samples[t].push(dt);
            }
        }
    }
    Ok(samples.iter_mut().map(|s| median(s)).collect())
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Persistence(format!("{}: {e}", path.display())))
}

const REPORT_HEADER: [&str; 8] = [
    "n",
    "precision",
    "recall",
    "f1",
    "accuracy",
    "tardiness",
    "total_benefit",
    "unclassified",
];

pub(crate) fn report_fields(r: &EvalReport) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.precision.to_string(),
        r.recall.to_string(),
        r.f1.to_string(),
        r.accuracy.to_string(),
        r.tardiness.to_string(),
        r.total_benefit.to_string(),
        r.unclassified.to_string(),
    ]
}

/// One row per point with every report field.
pub fn write_metrics_csv(path: impl AsRef<Path>, points: &[SweepPoint]) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    let mut header = vec!["id"];
    header.extend(REPORT_HEADER);
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![p.id.clone()];
        match &p.report {
            Some(r) => row.extend(report_fields(r)),
            None => {
                row.extend(std::iter::repeat_n(String::new(), REPORT_HEADER.len()));
                row[5] = p.accuracy.to_string();
                row[6] = p.tardiness.to_string();
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pareto_csv(path: impl AsRef<Path>, points: &[SweepPoint]) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(["id", "tardiness", "accuracy", "on_front"])?;
    for (p, on) in points.iter().zip(pareto_mask(points)) {
        w.write_record([p.id.clone(), p.tardiness.to_string(), p.accuracy.to_string(), on.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Tolerance table: one column per tolerance, `-` when no point qualifies.
pub fn write_tolerance_csv(path: impl AsRef<Path>, label: &str, points: &[SweepPoint], tols: &[f64]) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    let mut header = vec!["dataset".to_string()];
    header.extend(tols.iter().map(|t| format!("{t:.2}")));
    w.write_record(&header)?;
    let mut row = vec![label.to_string()];
    row.extend(tols.iter().map(|&t| match accuracy_at_tolerance(points, t) {
        Some(a) => format!("{a:.4}"),
        None => "-".to_string(),
    }));
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

pub fn write_scaling_csv(path: impl AsRef<Path>, report: &ScalingReport) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(["fraction", "n", "seconds"])?;
    for r in &report.rows {
        w.write_record([r.fraction.to_string(), r.n.to_string(), r.seconds.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_latency_csv(path: impl AsRef<Path>, mode: &str, medians: &[f64]) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(["mode", "tick", "median_seconds"])?;
    for (t, m) in medians.iter().enumerate() {
        w.write_record([mode.to_string(), (t + 1).to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
