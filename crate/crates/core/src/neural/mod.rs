//! The benefit regressor: a single-layer LSTM whose hidden-state history is
//! pooled by attention (query = current cell state), squashed, and read out by a
//! linear head.
//!
//! Everything runs in `f64`. Gradients are exact reverse-mode derivatives of the
//! mean squared error; [`finite_diff_grad`] is the independent oracle used to
//! check them.

mod adam;
mod attention;
mod gradcheck;
mod lstm;
mod model;

pub use adam::{adam_step, AdamState};
pub use attention::{attend, attention, AttentionOutput};
pub use gradcheck::{finite_diff_grad, group_relative_error, max_relative_error, relative_error};
pub use lstm::{lstm_forward, lstm_step, LstmTrace};
pub(crate) use model::head as model_head;
pub use model::{
    backward, backward_series, loss, predict_benefit, predict_benefit_with, predict_ticks, Prediction,
    PrefixSample,
    SeriesTargets,
};

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Squashing applied to the attention projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }
}

/// How the head state is formed from the recurrent history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttentionMode {
    /// Softmax attention over all hidden states so far, queried by the current
    /// cell state. O(t) work per new observation.
    #[default]
    Full,
    /// No attention: the head reads `[h_t; c_t]`. O(1) work per observation.
    LastStateOnly,
}

impl std::str::FromStr for AttentionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(AttentionMode::Full),
            "last" | "last-state-only" => Ok(AttentionMode::LastStateOnly),
            other => Err(Error::arg(format!("unknown attention mode `{other}` (full|last-state-only)"))),
        }
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default)]
    pub attention: AttentionMode,
}

impl ModelConfig {
    pub fn new(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            activation: Activation::Tanh,
            attention: AttentionMode::Full,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::Config(format!(
                "input and hidden dimensions must be >= 1 (got {} and {})",
                self.input_dim, self.hidden_dim
            )));
        }
        Ok(())
    }

    /// `4(H d + H H + H) + H 2H + H + 1`.
    pub fn param_count(&self) -> usize {
        let (d, h) = (self.input_dim, self.hidden_dim);
        4 * (h * d + h * h + h) + h * 2 * h + h + 1
    }
}

/// Named blocks of the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamGroup {
    /// `4H x d`, gate blocks in order input, forget, candidate, output.
    InputWeights,
    /// `4H x H`, same gate order.
    RecurrentWeights,
    /// `4H`.
    GateBias,
    /// `H x 2H` attention projection applied to `[context; query]`.
    Attention,
    /// `H`.
    HeadWeights,
    /// scalar.
    HeadBias,
}

impl ParamGroup {
    pub const ALL: [ParamGroup; 6] = [
        ParamGroup::InputWeights,
        ParamGroup::RecurrentWeights,
        ParamGroup::GateBias,
        ParamGroup::Attention,
        ParamGroup::HeadWeights,
        ParamGroup::HeadBias,
    ];

    pub fn range(self, cfg: &ModelConfig) -> Range<usize> {
        let (d, h) = (cfg.input_dim, cfg.hidden_dim);
        let ih = 4 * h * d;
        let hh = ih + 4 * h * h;
        let b = hh + 4 * h;
        let a = b + 2 * h * h;
        let w = a + h;
        match self {
            ParamGroup::InputWeights => 0..ih,
            ParamGroup::RecurrentWeights => ih..hh,
            ParamGroup::GateBias => hh..b,
            ParamGroup::Attention => b..a,
            ParamGroup::HeadWeights => a..w,
            ParamGroup::HeadBias => w..w + 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamGroup::InputWeights => "lstm.w_ih",
            ParamGroup::RecurrentWeights => "lstm.w_hh",
            ParamGroup::GateBias => "lstm.bias",
            ParamGroup::Attention => "attention.w_a",
            ParamGroup::HeadWeights => "head.w",
            ParamGroup::HeadBias => "head.w0",
        }
    }
}

/// All trainable parameters as one flat vector in [`ParamGroup`] order.
/// The same shape doubles as a gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub config: ModelConfig,
    data: Vec<f64>,
}

/// Gradients share the parameter layout.
pub type Gradients = ModelParams;

impl ModelParams {
    pub fn zeros(config: ModelConfig) -> Self {
        Self {
            config,
            data: vec![0.0; config.param_count()],
        }
    }

    /// Uniform in `[-1/sqrt(H), 1/sqrt(H)]` with forget-gate biases set to 1.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = 1.0 / (config.hidden_dim as f64).sqrt();
        let data = (0..config.param_count()).map(|_| rng.random_range(-k..=k)).collect();
        let mut p = Self { config, data };
        let h = config.hidden_dim;
        p.group_mut(ParamGroup::GateBias)[h..2 * h].fill(1.0);
        Ok(p)
    }

    pub fn from_flat(config: ModelConfig, data: Vec<f64>) -> Result<Self> {
        config.validate()?;
        if data.len() != config.param_count() {
            return Err(Error::shape(format!(
                "expected {} parameters, got {}",
                config.param_count(),
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("parameters contain non-finite entries".into()));
        }
        Ok(Self { config, data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn group(&self, g: ParamGroup) -> &[f64] {
        &self.data[g.range(&self.config)]
    }

    pub fn group_mut(&mut self, g: ParamGroup) -> &mut [f64] {
        let r = g.range(&self.config);
        &mut self.data[r]
    }

    pub fn head_bias(&self) -> f64 {
        self.group(ParamGroup::HeadBias)[0]
    }

    pub fn set_head_bias(&mut self, v: f64) {
        self.group_mut(ParamGroup::HeadBias)[0] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
