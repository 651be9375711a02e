use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_bundle, TrainConfig, TrainedBundle};
use crate::benefit::{BenefitSpec, Mode};
use crate::dataio::LabeledDataset;
use crate::error::{Error, Result};
use crate::eval::EvalReport;

/// Hyperparameter grid. Every combination is trained; margin fractions only
/// change the decision policy, so they reuse the trained models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Absolute misclassification-cost to savings-rate ratios.
    pub ms_ratios: Vec<f64>,
    pub learning_rates: Vec<f64>,
    pub hidden_dims: Vec<usize>,
    pub delta_fracs: Vec<f64>,
}

impl GridConfig {
    /// `M/s` in `{0.5, 1, 1.5, 2} x max_len`, `eta` in `{0.01, 0.001}`, `H` in
    /// `{16, 32}`, margin fraction in `{0.4, 0.5, 0.6, 0.7}`.
    pub fn standard(max_len: usize) -> Self {
        Self {
            ms_ratios: [0.5, 1.0, 1.5, 2.0].iter().map(|f| f * max_len as f64).collect(),
            learning_rates: vec![0.01, 0.001],
            hidden_dims: vec![16, 32],
            delta_fracs: vec![0.4, 0.5, 0.6, 0.7],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ms_ratios.is_empty()
            || self.learning_rates.is_empty()
            || self.hidden_dims.is_empty()
            || self.delta_fracs.is_empty()
        {
            return Err(Error::Config("every grid axis needs at least one value".into()));
        }
        Ok(())
    }

    /// Grid points in configuration order (M/s, then learning rate, hidden size, margin).
    pub fn points(&self, mode: Mode) -> Vec<GridPoint> {
        let deltas: &[f64] = match mode {
            Mode::Type => &self.delta_fracs,
            Mode::Outcome => &self.delta_fracs[..1],
        };
        let mut out = Vec::new();
        for &ms_ratio in &self.ms_ratios {
            for &learning_rate in &self.learning_rates {
                for &hidden_dim in &self.hidden_dims {
                    for &delta_frac in deltas {
                        out.push(GridPoint {
                            ms_ratio,
                            learning_rate,
                            hidden_dim,
                            delta_frac,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub ms_ratio: f64,
    pub learning_rate: f64,
    pub hidden_dim: usize,
    pub delta_frac: f64,
}

impl GridPoint {
    pub fn id(&self) -> String {
        format!(
            "ms{}_lr{}_h{}_d{}",
            self.ms_ratio, self.learning_rate, self.hidden_dim, self.delta_frac
        )
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub point: GridPoint,
    /// Trained bundle and its validation report, or the training error.
    pub outcome: std::result::Result<(TrainedBundle, EvalReport), String>,
    pub distance: Option<f64>,
    /// 1-based rank by distance; `None` for failed points.
    pub rank: Option<usize>,
}

impl GridResult {
    pub fn bundle(&self) -> Option<&TrainedBundle> {
        self.outcome.as_ref().ok().map(|(b, _)| b)
    }

    pub fn report(&self) -> Option<&EvalReport> {
        self.outcome.as_ref().ok().map(|(_, r)| r)
    }

    pub fn is_best(&self) -> bool {
        self.rank == Some(1)
    }
}

/// Distance of `(accuracy, tardiness)` to the ideal point `(1, 0)`.
pub fn distance(report: &EvalReport) -> f64 {
    ((1.0 - report.accuracy).powi(2) + report.tardiness.powi(2)).sqrt()
}

/// Ranks successful points by distance. Distances within `1e-12` count as equal
/// and fall back to lower tardiness, then lower `M/s`, then grid order.
pub fn rank_results(results: &mut [GridResult]) {
    for r in results.iter_mut() {
        r.distance = r.report().map(distance);
        r.rank = None;
    }
    let mut order: Vec<usize> = (0..results.len()).filter(|&i| results[i].distance.is_some()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&results[a], &results[b]);
        let (da, db) = (ra.distance.unwrap(), rb.distance.unwrap());
        let by_distance = if (da - db).abs() <= 1e-12 {
            std::cmp::Ordering::Equal
        } else {
            da.total_cmp(&db)
        };
        by_distance
            .then_with(|| ra.report().unwrap().tardiness.total_cmp(&rb.report().unwrap().tardiness))
            .then_with(|| ra.point.ms_ratio.total_cmp(&rb.point.ms_ratio))
            .then(a.cmp(&b))
    });
    for (rank, i) in order.into_iter().enumerate() {
        results[i].rank = Some(rank + 1);
    }
}

/// Trains every grid point (concurrently) and ranks them on validation.
///
/// A point that fails to train is recorded with its error; the sweep goes on.
pub fn grid_search(
    dataset: &LabeledDataset,
    mode: Mode,
    default_class: Option<usize>,
    grid: &GridConfig,
    base: &TrainConfig,
) -> Result<Vec<GridResult>> {
    grid.validate()?;
    let c = dataset.num_classes();
    let mut trainings = Vec::new();
    for &ms in &grid.ms_ratios {
        for &lr in &grid.learning_rates {
            for &h in &grid.hidden_dims {
                trainings.push((ms, lr, h));
            }
        }
    }
    let delta_fracs: Vec<f64> = match mode {
        Mode::Type => grid.delta_fracs.clone(),
        Mode::Outcome => grid.delta_fracs[..1].to_vec(),
    };
    let trained: Vec<_> = trainings
        .par_iter()
        .map(|&(ms, lr, h)| {
            let spec = BenefitSpec::from_ms_ratio(mode, c, ms, default_class)?;
            let cfg = TrainConfig {
                learning_rate: lr,
                hidden_dim: h,
                delta_frac: delta_fracs[0],
                ..base.clone()
            };
            train_bundle(dataset, &spec, &cfg)
        })
        .collect();

    let mut results = Vec::new();
    for ((ms, lr, h), outcome) in trainings.into_iter().zip(trained) {
        if let Err(e) = &outcome {
            warn!("grid point M/s={ms} lr={lr} H={h} failed: {e}");
        }
        let val = match &outcome {
            Ok(b) => Some(dataset_val(dataset, b)?),
            Err(_) => None,
        };
        for &delta_frac in &delta_fracs {
            let point = GridPoint {
                ms_ratio: ms,
                learning_rate: lr,
                hidden_dim: h,
                delta_frac,
            };
            let outcome = match (&outcome, &val) {
                (Ok(b), Some(val)) => {
                    let mut b = b.with_delta_frac(delta_frac);
                    b.evaluate_prepared(val)
                        .map(|r| {
                            b.val_report = Some(r.clone());
                            (b, r)
                        })
                        .map_err(|e| e.to_string())
                }
                (Err(e), _) => Err(e.to_string()),
                (Ok(_), None) => unreachable!("validation split exists for every trained point"),
            };
            results.push(GridResult {
                point,
                outcome,
                distance: None,
                rank: None,
            });
        }
    }
    rank_results(&mut results);
    Ok(results)
}

fn dataset_val(dataset: &LabeledDataset, bundle: &TrainedBundle) -> Result<LabeledDataset> {
    bundle.prepare(&bundle.validation_subset(dataset)?)
}
