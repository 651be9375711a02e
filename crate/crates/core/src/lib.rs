//! Benefit-aware early classification of time series.
//!
//! Each actively predicted class gets a recurrent regressor (LSTM, attention over
//! the hidden-state history, linear head) trained to estimate the *benefit* of
//! emitting that label now: savings from deciding early minus the cost of being
//! wrong. At inference time observations are streamed one at a time and a label is
//! emitted the first moment an estimated benefit turns positive.
//!
//! Module map:
//!
//! - [`dataio`]: UCR and multivariate loaders, interpolation, artifact trimming,
//!   median downsampling, `[0,1]` normalization.
//! - [`benefit`]: the payoff model, per-prefix regression targets, total benefit.
//! - [`neural`]: LSTM + attention + linear head with exact gradients, a
//!   finite-difference oracle and Adam.
//! - [`training`]: prefix samples, 90/10 split, per-class training, grid sweeps,
//!   bundle persistence.
//! - [`stream`]: the online decision engine.
//! - [`eval`]: metrics, Pareto fronts, tolerance tables and runtime benchmarks.
//! - [`synth`]: a synthetic outcome-classification generator.
//! - [`cli`]: the command-line front end used by the `early-benefit` binary.

pub mod benefit;
pub mod cli;
pub mod dataio;
pub mod error;
pub mod eval;
pub mod neural;
pub mod stream;
pub mod synth;
pub mod training;

pub use benefit::{BenefitSpec, DecisionRecord, Mode};
pub use dataio::{LabelMap, LabeledDataset, SeriesInstance};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalReport};
pub use neural::{AttentionMode, ModelConfig, ModelParams};
pub use stream::{DecisionPolicy, StreamState};
pub use training::{train_bundle, TrainConfig, TrainedBundle};


