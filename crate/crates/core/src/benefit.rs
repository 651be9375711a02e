//! The benefit payoff model.
//!
//! Emitting label `c` at tick `t` of a series of length `L` whose true label is
//! `l` is worth `(L - t) * s - cost(l, c)`: savings for deciding early minus the
//! misclassification penalty. In outcome mode the default (favorable) class is
//! never actively predicted and is worth zero; in type mode every class is
//! modeled. Ticks are 1-based throughout.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataio::SeriesInstance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Labels are end-of-monitoring outcomes; one default class needs no action.
    Outcome,
    /// Labels are generating processes; every class is actively predicted.
    Type,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outcome" => Ok(Mode::Outcome),
            "type" => Ok(Mode::Type),
            other => Err(Error::arg(format!("unknown mode `{other}` (outcome|type)"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Outcome => "outcome",
            Mode::Type => "type",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenefitSpec {
    pub mode: Mode,
    /// Savings per tick of earliness.
    pub s: f64,
    /// `cost[truth][predicted]`, zero on the diagonal.
    pub cost: Vec<Vec<f64>>,
    /// The favorable / no-action class (outcome mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_class: Option<usize>,
}

impl BenefitSpec {
    pub fn new(mode: Mode, s: f64, cost: Vec<Vec<f64>>, default_class: Option<usize>) -> Result<Self> {
        let spec = Self {
            mode,
            s,
            cost,
            default_class,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `s = 1` and every off-diagonal cost equal to `ratio` (the M/s knob).
    pub fn from_ms_ratio(
        mode: Mode,
        num_classes: usize,
        ratio: f64,
        default_class: Option<usize>,
    ) -> Result<Self> {
        let cost = (0..num_classes)
            .map(|l| (0..num_classes).map(|c| if l == c { 0.0 } else { ratio }).collect())
            .collect();
        Self::new(mode, 1.0, cost, default_class)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let spec: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Persistence(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.cost.len();
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::Config(format!("savings rate must be positive, got {}", self.s)));
        }
        if c < 2 {
            return Err(Error::Config("cost matrix needs at least 2 classes".into()));
        }
        for (l, row) in self.cost.iter().enumerate() {
            if row.len() != c {
                return Err(Error::Config(format!("cost row {l} has {} entries, expected {c}", row.len())));
            }
            for (p, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Config(format!("cost[{l}][{p}] = {v} must be finite and >= 0")));
                }
                if l == p && v != 0.0 {
                    return Err(Error::Config(format!("cost[{l}][{l}] must be zero")));
                }
            }
        }
        match (self.mode, self.default_class) {
            (Mode::Outcome, None) => Err(Error::Config("outcome mode needs a default class".into())),
            (Mode::Outcome, Some(d)) if d >= c => {
                Err(Error::Config(format!("default class {d} outside 0..{c}")))
            }
            (Mode::Type, Some(_)) => Err(Error::Config("type mode has no default class".into())),
            _ => Ok(()),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.cost.len()
    }

    /// Classes that get a regressor: all but the default in outcome mode.
    pub fn active_classes(&self) -> Vec<usize> {
        (0..self.num_classes())
            .filter(|&c| Some(c) != self.default_class)
            .collect()
    }

    pub fn is_active(&self, class: usize) -> bool {
        class < self.num_classes() && Some(class) != self.default_class
    }

    /// Savings for deciding at tick `t` of `len`. Linear in the remaining time;
    /// other savings curves would slot in here.
    pub fn savings(&self, t: usize, len: usize) -> f64 {
        (len - t) as f64 * self.s
    }

    /// The largest off-diagonal cost; equals `M` for a symmetric spec.
    pub fn max_cost(&self) -> f64 {
        self.cost.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Spread between the best and worst class benefit for a series of label
    /// `truth` at any tick: the payoff ranges differ only through the costs.
    pub fn target_spread(&self, truth: usize) -> f64 {
        let row = self.active_classes().into_iter().map(|c| self.cost[truth][c]);
        let (lo, hi) = row.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }
}

/// Benefit of predicting `predicted` at tick `t` (1-based) on a series of length
/// `len` whose true class is `truth`.
pub fn benefit_value(spec: &BenefitSpec, truth: usize, predicted: usize, t: usize, len: usize) -> Result<f64> {
    if t == 0 || t > len {
        return Err(Error::arg(format!("tick {t} outside 1..={len}")));
    }
    let c = spec.num_classes();
    if truth >= c || predicted >= c {
        return Err(Error::arg(format!("class out of range for {c} classes")));
    }
    if spec.mode == Mode::Outcome && Some(predicted) == spec.default_class {
        return Ok(0.0);
    }
    Ok(spec.savings(t, len) - spec.cost[truth][predicted])
}

/// Per-tick regression targets `b_1..b_L` for the regressor of `model_class`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetVector {
    pub values: Vec<f64>,
}

impl TargetVector {
    /// Target at 1-based tick `t`.
    pub fn at(&self, t: usize) -> f64 {
        self.values[t - 1]
    }
}

pub fn build_targets(spec: &BenefitSpec, inst: &SeriesInstance, model_class: usize) -> Result<TargetVector> {
    targets_for(spec, inst.label, inst.len(), model_class)
}

pub(crate) fn targets_for(spec: &BenefitSpec, truth: usize, len: usize, model_class: usize) -> Result<TargetVector> {
    if !spec.is_active(model_class) {
        return Err(Error::arg(format!(
            "class {model_class} is not actively modeled (default class has no regressor)"
        )));
    }
    let values = (1..=len)
        .map(|t| benefit_value(spec, truth, model_class, t, len))
        .collect::<Result<Vec<_>>>()?;
    Ok(TargetVector { values })
}

/// One decision made on one series. `predicted == None` means no active label
/// was emitted (default class in outcome mode, un-classified in type mode) and
/// `tick` then equals `len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub id: String,
    pub truth: usize,
    pub predicted: Option<usize>,
    pub tick: usize,
    pub len: usize,
}

impl DecisionRecord {
    pub fn new(truth: usize, predicted: Option<usize>, tick: usize, len: usize) -> Self {
        Self {
            id: String::new(),
            truth,
            predicted,
            tick,
            len,
        }
    }
}

/// Sum of benefits over decided instances; undecided ones contribute zero.
pub fn total_benefit(spec: &BenefitSpec, decisions: &[DecisionRecord]) -> Result<f64> {
    let mut total = 0.0;
    for d in decisions {
        if d.tick == 0 || d.tick > d.len {
            return Err(Error::arg(format!("decision `{}`: tick {} outside 1..={}", d.id, d.tick, d.len)));
        }
        if let Some(p) = d.predicted {
            total += benefit_value(spec, d.truth, p, d.tick, d.len)?;
        }
    }
    Ok(total)
}
