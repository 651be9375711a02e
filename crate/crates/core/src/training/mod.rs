//! Prefix-sample construction, per-class regressor training, grid sweeps and
//! bundle persistence.

mod grid;
mod persist;
mod regressor;
mod samples;

pub use grid::{distance, grid_search, rank_results, GridConfig, GridPoint, GridResult};
pub use persist::{load_bundle, save_bundle, BUNDLE_FORMAT_VERSION};
pub use regressor::{series_mse, train_regressor, EpochLoss, TrainHistory};
pub use samples::{
    group_series_targets, make_prefix_samples, prefix_ticks, series_targets, split_indices, split_train_val,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benefit::{BenefitSpec, Mode};
use crate::dataio::{LabelMap, LabeledDataset, NormStats};
use crate::error::{Error, Result};
use crate::eval::{default_positive, evaluate, EvalReport};
use crate::neural::{Activation, AttentionMode, ModelConfig, ModelParams};
use crate::stream::{run_decisions, DecisionPolicy, ReplayOptions};

/// Derives an independent seed for component `stream` from the user seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SPLIT_STREAM: u64 = 0;
const CLASS_STREAM: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub hidden_dim: usize,
    /// Fraction of the largest per-instance target spread used as the type-mode margin.
    pub delta_frac: f64,
    pub epochs: usize,
    /// Whole series per minibatch.
    pub batch_size: usize,
    pub stride: usize,
    pub seed: u64,
    /// Stop after this many epochs without validation improvement.
    pub patience: Option<usize>,
    pub train_frac: f64,
    pub attention: AttentionMode,
    pub activation: Activation,
    /// Fit min/max scaling on the training file and store it in the bundle.
    pub normalize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            hidden_dim: 16,
            delta_frac: 0.5,
            epochs: 100,
            batch_size: 2,
            stride: 1,
            seed: 0,
            patience: Some(10),
            train_frac: 0.9,
            attention: AttentionMode::Full,
            activation: Activation::Tanh,
            normalize: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.hidden_dim == 0 {
            return bad("hidden dimension must be >= 1".into());
        }
        if !(self.delta_frac >= 0.0 && self.delta_frac.is_finite()) {
            return bad(format!("margin fraction must be >= 0, got {}", self.delta_frac));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch size must be >= 1".into());
        }
        samples::check_stride(self.stride)?;
        if !(self.train_frac > 0.0 && self.train_frac <= 1.0) {
            return bad(format!("train fraction must lie in (0, 1], got {}", self.train_frac));
        }
        Ok(())
    }

    pub fn model_config(&self, input_dim: usize) -> ModelConfig {
        ModelConfig {
            input_dim,
            hidden_dim: self.hidden_dim,
            activation: self.activation,
            attention: self.attention,
        }
    }
}

/// One trained benefit regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub class: usize,
    pub seed: u64,
    pub params: ModelParams,
    pub history: TrainHistory,
}

/// Everything needed to stream decisions on new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedBundle {
    pub config: TrainConfig,
    pub model_config: ModelConfig,
    pub spec: BenefitSpec,
    pub policy: DecisionPolicy,
    /// Largest spread between an instance's per-class targets on the training split.
    pub target_spread: f64,
    pub models: Vec<ClassModel>,
    pub norm: Option<NormStats>,
    pub label_map: LabelMap,
    pub positive_class: usize,
    pub validation_ids: Vec<String>,
    pub val_report: Option<EvalReport>,
}

impl TrainedBundle {
    pub fn model_refs(&self) -> Vec<(usize, &ModelParams)> {
        self.models.iter().map(|m| (m.class, &m.params)).collect()
    }

    /// Applies the stored normalization to raw data of the same layout.
    pub fn prepare(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        if data.dim() != self.model_config.input_dim {
            return Err(Error::shape(format!(
                "data has {} channels, bundle expects {}",
                data.dim(),
                self.model_config.input_dim
            )));
        }
        if data.num_classes() != self.spec.num_classes() {
            return Err(Error::Config(format!(
                "data has {} classes, bundle was trained on {}",
                data.num_classes(),
                self.spec.num_classes()
            )));
        }
        match &self.norm {
            Some(n) => n.apply(data),
            None => Ok(data.clone()),
        }
    }

    /// Same models, type-mode margin recomputed for another fraction.
    pub fn with_delta_frac(&self, delta_frac: f64) -> Self {
        let mut b = self.clone();
        b.config.delta_frac = delta_frac;
        if b.spec.mode == Mode::Type {
            b.policy.delta_abs = delta_frac * b.target_spread;
        }
        b
    }

    /// Validation instances picked out of the (raw) training file.
    pub fn validation_subset(&self, train_data: &LabeledDataset) -> Result<LabeledDataset> {
        let idx: Vec<usize> = train_data
            .instances()
            .iter()
            .enumerate()
            .filter(|(_, inst)| self.validation_ids.contains(&inst.id))
            .map(|(i, _)| i)
            .collect();
        if idx.len() != self.validation_ids.len() {
            return Err(Error::Format("training file does not contain every validation id".into()));
        }
        train_data.subset(&idx)
    }

    /// Evaluates the bundle on already prepared data.
    pub fn evaluate_prepared(&self, data: &LabeledDataset) -> Result<EvalReport> {
        let runs = run_decisions(self, data, ReplayOptions::default())?;
        let records: Vec<_> = runs.into_iter().map(|r| r.record).collect();
        evaluate(&records, &self.spec, self.positive_class)
    }
}

/// Trains one regressor per actively modeled class and resolves the decision policy.
///
/// Classes train concurrently; each uses a seed derived from `config.seed` and
/// its class index, so the result does not depend on scheduling.
pub fn train_bundle(dataset: &LabeledDataset, spec: &BenefitSpec, config: &TrainConfig) -> Result<TrainedBundle> {
    spec.validate()?;
    config.validate()?;
    if spec.num_classes() != dataset.num_classes() {
        return Err(Error::Config(format!(
            "benefit spec covers {} classes, data has {}",
            spec.num_classes(),
            dataset.num_classes()
        )));
    }
    if !dataset.is_complete() {
        return Err(Error::Format("training data has missing values; interpolate first".into()));
    }
    let norm = if config.normalize { Some(NormStats::fit(dataset)?) } else { None };
    let data = match &norm {
        Some(n) => n.apply(dataset)?,
        None => dataset.clone(),
    };
    let labels: Vec<usize> = data.instances().iter().map(|i| i.label).collect();
    let (train_idx, val_idx) = split_indices(&labels, config.train_frac, derive_seed(config.seed, SPLIT_STREAM))?;
    let train_set = data.subset(&train_idx)?;
    let val_set = data.subset(&val_idx)?;
    let model_config = config.model_config(data.dim());

    let models = spec
        .active_classes()
        .into_par_iter()
        .map(|class| {
            let seed = derive_seed(config.seed, CLASS_STREAM + class as u64);
            let train = group_series_targets(spec, train_set.instances(), class, config.stride)?;
            let val = group_series_targets(spec, val_set.instances(), class, config.stride)?;
            let (params, history) = train_regressor(&train, &val, model_config, config, seed)?;
            Ok(ClassModel {
                class,
                seed,
                params,
                history,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let target_spread = train_set
        .instances()
        .iter()
        .map(|i| spec.target_spread(i.label))
        .fold(0.0, f64::max);
    let policy = DecisionPolicy {
        mode: spec.mode,
        delta_abs: match spec.mode {
            Mode::Type => config.delta_frac * target_spread,
            Mode::Outcome => 0.0,
        },
        attention: config.attention,
    };
    let mut bundle = TrainedBundle {
        config: config.clone(),
        model_config,
        spec: spec.clone(),
        policy,
        target_spread,
        models,
        norm,
        label_map: dataset.label_map().clone(),
        positive_class: default_positive(spec),
        validation_ids: val_set.instances().iter().map(|i| i.id.clone()).collect(),
        val_report: None,
    };
    bundle.val_report = Some(bundle.evaluate_prepared(&val_set)?);
    Ok(bundle)
}
