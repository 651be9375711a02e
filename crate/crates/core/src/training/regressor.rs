use log::debug;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::neural::{
    adam_step, backward_series, predict_ticks, AdamState, Gradients, ModelConfig, ModelParams, ParamGroup,
    SeriesTargets,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    /// `None` when there is no validation data.
    pub val: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochLoss>,
    /// Epoch whose parameters were kept (1-based).
    pub best_epoch: usize,
    /// Targets were divided by this during optimization.
    pub target_scale: f64,
}

impl TrainHistory {
    pub fn best_val(&self) -> Option<f64> {
        self.epochs.get(self.best_epoch.checked_sub(1)?)?.val
    }
}

/// Mean squared error of `params` over every prefix in `groups`.
pub fn series_mse(params: &ModelParams, groups: &[SeriesTargets<'_>]) -> Result<f64> {
    let mut sse = 0.0;
    let mut count = 0usize;
    for g in groups {
        let pred = predict_ticks(params, g.series, &g.ticks)?;
        for (p, t) in pred.iter().zip(&g.targets) {
            sse += (p - t) * (p - t);
        }
        count += g.len();
    }
    if count == 0 {
        return Err(Error::arg("no prefixes to evaluate"));
    }
    Ok(sse / count as f64)
}

fn scaled<'a>(groups: &[SeriesTargets<'a>], scale: f64) -> Vec<SeriesTargets<'a>> {
    groups
        .iter()
        .map(|g| SeriesTargets {
            series: g.series,
            ticks: g.ticks.clone(),
            targets: g.targets.iter().map(|b| b / scale).collect(),
        })
        .collect()
}

/// Fits one benefit regressor with minibatch Adam on the mean squared error.
///
/// Targets are divided by their largest magnitude during optimization and the
/// linear head is rescaled afterwards, so the returned model predicts in the
/// original units. Each minibatch holds `batch_size` whole series; the loss is
/// the mean over all of their prefixes. The parameters with the lowest
/// validation loss are kept.
pub fn train_regressor(
    train: &[SeriesTargets<'_>],
    val: &[SeriesTargets<'_>],
    model_config: ModelConfig,
    config: &TrainConfig,
    seed: u64,
) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    if train.iter().all(SeriesTargets::is_empty) {
        return Err(Error::arg("no training samples"));
    }
    let scale = train
        .iter()
        .flat_map(|g| g.targets.iter())
        .fold(0.0f64, |m, b| m.max(b.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let train_s = scaled(train, scale);
    let val_s = scaled(val, scale);

    let mut params = ModelParams::init(model_config, seed)?;
    let mut adam = AdamState::new(config.learning_rate, params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_5a3c);
    let mut order: Vec<usize> = (0..train_s.len()).collect();
    let mut grad = Gradients::zeros(model_config);

    let mut best = params.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut stale = 0;
    let mut epochs = Vec::with_capacity(config.epochs);
    let sq = scale * scale;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut sse = 0.0;
        let mut count = 0usize;
        for batch in order.chunks(config.batch_size) {
            let n: usize = batch.iter().map(|&i| train_s[i].len()).sum();
            if n == 0 {
                continue;
            }
            grad.as_mut_slice().fill(0.0);
            let w = 1.0 / n as f64;
            for &i in batch {
                sse += backward_series(&params, &train_s[i], w, &mut grad).map_err(|e| diverged(epoch, e))?;
            }
            count += n;
            adam_step(&mut params, &grad, &mut adam).map_err(|e| diverged(epoch, e))?;
        }
        let train_loss = sse / count as f64 * sq;
        if !train_loss.is_finite() {
            return Err(Error::Training {
                epoch,
                detail: "training loss is not finite".into(),
            });
        }
        let val_loss = if val_s.is_empty() {
            None
        } else {
            Some(series_mse(&params, &val_s).map_err(|e| diverged(epoch, e))? * sq)
        };
        // the train loss is accumulated while the parameters move; selection on
        // it is only a fallback when there is no validation split
        let score = val_loss.unwrap_or(train_loss);
        if !score.is_finite() {
            return Err(Error::Training {
                epoch,
                detail: "validation loss is not finite".into(),
            });
        }
        debug!("epoch {epoch}: train {train_loss:.6} val {val_loss:?}");
        epochs.push(EpochLoss {
            epoch,
            train: train_loss,
            val: val_loss,
        });
        if score < best_loss {
            best_loss = score;
            best_epoch = epoch;
            best.as_mut_slice().copy_from_slice(params.as_slice());
            stale = 0;
        } else {
            stale += 1;
            if config.patience.is_some_and(|p| stale >= p) {
                break;
            }
        }
    }

    best.group_mut(ParamGroup::HeadWeights).iter_mut().for_each(|w| *w *= scale);
    best.set_head_bias(best.head_bias() * scale);
    Ok((
        best,
        TrainHistory {
            epochs,
            best_epoch,
            target_scale: scale,
        },
    ))
}

fn diverged(epoch: usize, e: Error) -> Error {
    match e {
        Error::Numeric(detail) => Error::Training { epoch, detail },
        other => other,
    }
}
