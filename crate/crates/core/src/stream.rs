//! Online decision engine.
//!
//! A [`StreamState`] consumes one observation at a time, advances every class
//! regressor by one recurrent step and emits a label the first tick the decision
//! rule holds. Once a decision fires the state is sealed: later observations
//! still update the recurrences (so attention can be exported) but never revise
//! the decision.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benefit::{DecisionRecord, Mode};
use crate::dataio::{LabeledDataset, SeriesInstance};
use crate::error::{Error, Result};
use crate::neural::{attend, lstm_step, AttentionMode, ModelParams, ParamGroup};
use crate::training::TrainedBundle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionPolicy {
    pub mode: Mode,
    /// Required lead of the best class over the runner-up (type mode only).
    pub delta_abs: f64,
    pub attention: AttentionMode,
}

impl DecisionPolicy {
    pub fn outcome(attention: AttentionMode) -> Self {
        Self {
            mode: Mode::Outcome,
            delta_abs: 0.0,
            attention,
        }
    }

    pub fn typed(delta_abs: f64, attention: AttentionMode) -> Self {
        Self {
            mode: Mode::Type,
            delta_abs,
            attention,
        }
    }
}

/// The decision rule applied to one tick's estimates `(class, benefit)`.
///
/// Outcome mode fires the best active class once its estimate is positive. Type
/// mode fires the arg-max class when its estimate is positive and leads every
/// other class by at least `delta_abs`. Ties go to the lowest class index; a
/// lead of exactly `delta_abs` fires.
pub fn decide(policy: &DecisionPolicy, estimates: &[(usize, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &(c, b) in estimates {
        if best.is_none_or(|(bc, bb)| b > bb || (b == bb && c < bc)) {
            best = Some((c, b));
        }
    }
    let (class, top) = best?;
    if top <= 0.0 {
        return None;
    }
    match policy.mode {
        Mode::Outcome => Some(class),
        Mode::Type => {
            let runner_up = estimates
                .iter()
                .filter(|&&(c, _)| c != class)
                .map(|&(_, b)| b)
                .fold(f64::NEG_INFINITY, f64::max);
            (top - runner_up >= policy.delta_abs).then_some(class)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Undecided,
    /// An active label fired at `tick`.
    Decided { class: usize, tick: usize },
    /// Outcome mode, nothing fired: default class at the final tick.
    Finalized { class: usize, tick: usize },
    /// Type mode, nothing fired by the final tick.
    Unclassified { tick: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionOutcome {
    pub status: Status,
    /// Current tick (number of observations consumed).
    pub tick: usize,
    /// Latest `(class, benefit)` estimate per modeled class.
    pub estimates: Vec<(usize, f64)>,
    /// Per-class attention weights over ticks `1..=tick` (full mode only).
    pub attention: Option<Vec<Vec<f64>>>,
}

struct ClassStream<'b> {
    class: usize,
    params: &'b ModelParams,
    h: Vec<f64>,
    c: Vec<f64>,
    h_next: Vec<f64>,
    c_next: Vec<f64>,
    gates: Vec<f64>,
    /// Hidden-state history, tick-major (full attention only).
    history: Vec<f64>,
    alpha: Vec<f64>,
    estimate: f64,
}

pub struct StreamState<'b> {
    policy: DecisionPolicy,
    default_class: Option<usize>,
    dim: usize,
    classes: Vec<ClassStream<'b>>,
    t: usize,
    decision: Option<(usize, usize)>,
    finished: Option<Status>,
}

/// Fresh stream over every class model of `bundle`.
pub fn init_stream(bundle: &TrainedBundle, policy: DecisionPolicy) -> Result<StreamState<'_>> {
    if bundle.spec.mode != policy.mode {
        return Err(Error::Config(format!(
            "bundle was trained in {} mode but the policy is {} mode",
            bundle.spec.mode, policy.mode
        )));
    }
    let models = bundle.models.iter().map(|m| (m.class, &m.params)).collect();
    StreamState::from_models(models, policy, bundle.spec.default_class)
}

impl<'b> StreamState<'b> {
    /// Stream over explicit `(class, params)` pairs. Outcome mode needs the default class.
    pub fn from_models(
        models: Vec<(usize, &'b ModelParams)>,
        policy: DecisionPolicy,
        default_class: Option<usize>,
    ) -> Result<Self> {
        let Some(&(_, first)) = models.first() else {
            return Err(Error::Config("no class models to stream".into()));
        };
        if policy.mode == Mode::Outcome && default_class.is_none() {
            return Err(Error::Config("outcome mode needs a default class".into()));
        }
        if !(policy.delta_abs >= 0.0) {
            return Err(Error::Config(format!("margin must be >= 0, got {}", policy.delta_abs)));
        }
        let dim = first.config.input_dim;
        let mut classes = Vec::with_capacity(models.len());
        for (class, params) in models {
            if params.config.input_dim != dim {
                return Err(Error::Config("class models disagree on input dimension".into()));
            }
            let hd = params.config.hidden_dim;
            classes.push(ClassStream {
                class,
                params,
                h: vec![0.0; hd],
                c: vec![0.0; hd],
                h_next: vec![0.0; hd],
                c_next: vec![0.0; hd],
                gates: vec![0.0; 4 * hd],
                history: Vec::new(),
                alpha: Vec::new(),
                estimate: f64::NAN,
            });
        }
        Ok(Self {
            policy,
            default_class,
            dim,
            classes,
            t: 0,
            decision: None,
            finished: None,
        })
    }

    pub fn tick(&self) -> usize {
        self.t
    }

    pub fn policy(&self) -> &DecisionPolicy {
        &self.policy
    }

    pub fn status(&self) -> Status {
        if let Some(s) = self.finished {
            return s;
        }
        match self.decision {
            Some((class, tick)) => Status::Decided { class, tick },
            None => Status::Undecided,
        }
    }

    pub fn estimates(&self) -> Vec<(usize, f64)> {
        if self.t == 0 {
            return Vec::new();
        }
        self.classes.iter().map(|s| (s.class, s.estimate)).collect()
    }

    /// Consumes observation `x_t` and applies the decision rule.
    pub fn observe(&mut self, x: &[f64]) -> Result<DecisionOutcome> {
        self.advance(x)?;
        Ok(self.outcome(self.policy.attention == AttentionMode::Full))
    }

    /// Like [`observe`](Self::observe) without copying attention weights into the
    /// returned outcome.
    pub fn observe_lean(&mut self, x: &[f64]) -> Result<Status> {
        self.advance(x)?;
        Ok(self.status())
    }

    fn advance(&mut self, x: &[f64]) -> Result<()> {
        if self.finished.is_some() {
            return Err(Error::State("stream already finalized".into()));
        }
        if x.len() != self.dim {
            return Err(Error::shape(format!(
                "observation has {} values, model expects {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg(format!("non-finite observation at tick {}", self.t + 1)));
        }
        let mode = self.policy.attention;
        for s in &mut self.classes {
            lstm_step(s.params, x, &s.h, &s.c, &mut s.gates, &mut s.h_next, &mut s.c_next);
            std::mem::swap(&mut s.h, &mut s.h_next);
            std::mem::swap(&mut s.c, &mut s.c_next);
            let hd = s.params.config.hidden_dim;
            let hiddens: &[f64] = match mode {
                AttentionMode::Full => {
                    s.history.extend_from_slice(&s.h);
                    &s.history
                }
                AttentionMode::LastStateOnly => &s.h,
            };
            let att = attend(
                mode,
                hiddens,
                hd,
                &s.c,
                s.params.group(ParamGroup::Attention),
                s.params.config.activation,
            );
            s.estimate = crate::neural::model_head(s.params, &att.h_attn);
            s.alpha = att.alpha;
            if !s.estimate.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite benefit estimate for class {} at tick {}",
                    s.class,
                    self.t + 1
                )));
            }
        }
        self.t += 1;
        if self.decision.is_none() {
            let estimates = self.estimates();
            if let Some(class) = decide(&self.policy, &estimates) {
                self.decision = Some((class, self.t));
            }
        }
        Ok(())
    }

    fn outcome(&self, with_attention: bool) -> DecisionOutcome {
        DecisionOutcome {
            status: self.status(),
            tick: self.t,
            estimates: self.estimates(),
            attention: with_attention.then(|| self.classes.iter().map(|s| s.alpha.clone()).collect()),
        }
    }

    /// Closes the stream after exactly `len` observations.
    pub fn finalize(&mut self, len: usize) -> Result<DecisionOutcome> {
        if self.finished.is_none() {
            if self.t != len {
                return Err(Error::State(format!(
                    "finalize declared length {len} but {} observations were consumed",
                    self.t
                )));
            }
            let status = match (self.decision, self.policy.mode) {
                (Some((class, tick)), _) => Status::Decided { class, tick },
                (None, Mode::Outcome) => Status::Finalized {
                    class: self.default_class.expect("checked at construction"),
                    tick: len,
                },
                (None, Mode::Type) => Status::Unclassified { tick: len },
            };
            self.finished = Some(status);
        }
        Ok(self.outcome(false))
    }

    /// Current attention weights `(class, alpha_1..alpha_t)` of every class model.
    pub fn attention_snapshot(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        if self.policy.attention == AttentionMode::LastStateOnly {
            return Err(Error::Unsupported(
                "attention weights are not computed in last-state-only mode".into(),
            ));
        }
        if self.t == 0 {
            return Err(Error::State("no observations consumed yet".into()));
        }
        Ok(self.classes.iter().map(|s| (s.class, s.alpha.clone())).collect())
    }
}

/// Converts a finished stream into a decision record.
pub fn to_record(id: &str, truth: usize, len: usize, status: Status) -> Result<DecisionRecord> {
    let (predicted, tick) = match status {
        Status::Decided { class, tick } => (Some(class), tick),
        Status::Finalized { tick, .. } | Status::Unclassified { tick } => (None, tick),
        Status::Undecided => return Err(Error::State(format!("stream `{id}` was not finalized"))),
    };
    Ok(DecisionRecord {
        id: id.to_string(),
        truth,
        predicted,
        tick,
        len,
    })
}

/// Everything recorded while replaying one series through the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamRun {
    pub record: DecisionRecord,
    /// Per tick, the estimate of each modeled class (when traced).
    pub trace: Vec<Vec<f64>>,
    /// `(eval_tick, class, alpha_1..alpha_tick)` rows (when exporting attention).
    pub attention: Vec<(usize, usize, Vec<f64>)>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReplayOptions {
    pub trace: bool,
    pub attention: bool,
}

/// Streams a complete (already normalized) series through a fresh state.
pub fn replay(
    models: &[(usize, &ModelParams)],
    policy: DecisionPolicy,
    default_class: Option<usize>,
    inst: &SeriesInstance,
    opts: ReplayOptions,
) -> Result<StreamRun> {
    inst.require_complete("stream")?;
    let mut state = StreamState::from_models(models.to_vec(), policy, default_class)?;
    let mut trace = Vec::new();
    let mut attention = Vec::new();
    let want_alpha = opts.attention && policy.attention == AttentionMode::Full;
    for x in inst.sequence().rows() {
        state.observe_lean(x)?;
        if opts.trace {
            trace.push(state.classes.iter().map(|s| s.estimate).collect());
        }
        if want_alpha {
            for s in &state.classes {
                attention.push((state.t, s.class, s.alpha.clone()));
            }
        }
    }
    let out = state.finalize(inst.len())?;
    Ok(StreamRun {
        record: to_record(&inst.id, inst.label, inst.len(), out.status)?,
        trace,
        attention,
    })
}

/// Streams every instance of an already prepared dataset through the bundle.
/// Instances run concurrently; each owns its state.
pub fn run_decisions(bundle: &TrainedBundle, data: &LabeledDataset, opts: ReplayOptions) -> Result<Vec<StreamRun>> {
    if bundle.spec.mode != bundle.policy.mode {
        return Err(Error::Config("bundle policy and benefit spec disagree on mode".into()));
    }
    let models = bundle.model_refs();
    data.instances()
        .par_iter()
        .map(|inst| replay(&models, bundle.policy, bundle.spec.default_class, inst, opts))
        .collect()
}
