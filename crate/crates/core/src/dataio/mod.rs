//! Loading, validation and preprocessing of labeled time-series datasets.
//!
//! Two on-disk formats are supported: the UCR archive layout (one fixed-length
//! univariate series per line) and a JSON-lines multivariate layout that allows
//! variable lengths and `null` missing markers. In memory a missing measurement
//! is tracked by an explicit mask, never by a sentinel value.

mod multivariate;
mod preprocess;
mod ucr;

pub use multivariate::{load_multivariate, load_multivariate_with_map, write_multivariate};
pub use preprocess::{
    fit_apply_normalize, interpolate_missing, median_downsample, trim_artifacts, NormStats,
    DEFAULT_LEAD_SIGMA, DEFAULT_TRAIL_EPS,
};
pub use ucr::{load_ucr, load_ucr_with_map, write_ucr};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Borrowed row-major view over `len * dim` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sequence<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> Sequence<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::shape(format!(
                "{} values cannot be split into rows of width {dim}",
                data.len()
            )));
        }
        Ok(Self { data, dim })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Observation at 0-based position `t`.
    pub fn row(&self, t: usize) -> &'a [f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &'a [f64]> + 'a {
        self.data.chunks_exact(self.dim)
    }

    /// The first `t` observations.
    pub fn prefix(&self, t: usize) -> Sequence<'a> {
        Sequence {
            data: &self.data[..t * self.dim],
            dim: self.dim,
        }
    }

    pub fn as_slice(&self) -> &'a [f64] {
        self.data
    }
}

/// One labeled multivariate series. Values are stored row-major (tick by tick).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInstance {
    pub id: String,
    pub label: usize,
    dim: usize,
    values: Vec<f64>,
    /// Row-major missing mask; empty when the instance is complete.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    missing: Vec<bool>,
}

impl SeriesInstance {
    /// Complete instance from row-major values.
    pub fn new(id: impl Into<String>, label: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        check_shape(&id, dim, values.len())?;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!(
                "instance `{id}`: non-finite value at tick {}, channel {}",
                pos / dim + 1,
                pos % dim
            )));
        }
        Ok(Self {
            id,
            label,
            dim,
            values,
            missing: Vec::new(),
        })
    }

    /// Instance whose entries may be missing (`None`).
    pub fn with_missing(
        id: impl Into<String>,
        label: usize,
        dim: usize,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        let id = id.into();
        check_shape(&id, dim, values.len())?;
        if values.iter().all(Option::is_some) {
            let dense = values.into_iter().map(|v| v.unwrap()).collect();
            return Self::new(id, label, dim, dense);
        }
        let missing = values.iter().map(Option::is_none).collect();
        let dense: Vec<f64> = values.into_iter().map(|v| v.unwrap_or(0.0)).collect();
        if let Some(pos) = dense.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!(
                "instance `{id}`: non-finite value at tick {}, channel {}",
                pos / dim + 1,
                pos % dim
            )));
        }
        Ok(Self {
            id,
            label,
            dim,
            values: dense,
            missing,
        })
    }

    pub fn from_rows(id: impl Into<String>, label: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let id = id.into();
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Format(format!("instance `{id}`: rows of unequal width")));
        }
        Self::new(id, label, dim, rows.concat())
    }

    /// Number of ticks `L`.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    /// Value at 0-based tick `t`, channel `ch`; `None` if missing.
    pub fn get(&self, t: usize, ch: usize) -> Option<f64> {
        let k = t * self.dim + ch;
        if self.missing.get(k).copied().unwrap_or(false) {
            None
        } else {
            Some(self.values[k])
        }
    }

    /// Raw row-major storage. Missing entries read as `0.0`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Full series as a view. Only meaningful for complete instances.
    pub fn sequence(&self) -> Sequence<'_> {
        Sequence {
            data: &self.values,
            dim: self.dim,
        }
    }

    pub fn channel(&self, ch: usize) -> Vec<Option<f64>> {
        (0..self.len()).map(|t| self.get(t, ch)).collect()
    }

    pub(crate) fn require_complete(&self, what: &str) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "{what}: instance `{}` still has {} missing values (interpolate first)",
                self.id,
                self.missing_count()
            )))
        }
    }

    /// Same identity and label with new complete values.
    pub(crate) fn replaced(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.id.clone(), self.label, self.dim, values)
    }
}

fn check_shape(id: &str, dim: usize, n: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Format(format!("instance `{id}`: dimension must be at least 1")));
    }
    if n == 0 {
        return Err(Error::Format(format!("instance `{id}`: series is empty")));
    }
    if n % dim != 0 {
        return Err(Error::Format(format!(
            "instance `{id}`: {n} values do not form rows of width {dim}"
        )));
    }
    Ok(())
}

/// Mapping from original label spellings to contiguous class indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    names: Vec<String>,
}

impl LabelMap {
    /// Builds a map from observed labels. Numeric labels are ordered numerically,
    /// anything else lexicographically.
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut names: Vec<String> = labels.into_iter().map(|s| s.trim().to_string()).collect();
        names.sort();
        names.dedup();
        if names.iter().all(|n| n.parse::<f64>().is_ok()) {
            names.sort_by(|a, b| {
                let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
                x.total_cmp(&y)
            });
            // "1" and "1.0" are the same class
            names.dedup_by(|a, b| a.parse::<f64>().unwrap() == b.parse::<f64>().unwrap());
        }
        Self { names }
    }

    pub fn new(names: Vec<String>) -> Self {
        Self { names }
    }

    /// Identity map `"0".."C-1"`.
    pub fn identity(num_classes: usize) -> Self {
        Self {
            names: (0..num_classes).map(|c| c.to_string()).collect(),
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        let label = label.trim();
        if let Some(i) = self.names.iter().position(|n| n == label) {
            return Some(i);
        }
        let x = label.parse::<f64>().ok()?;
        self.names
            .iter()
            .position(|n| n.parse::<f64>().map(|y| y == x).unwrap_or(false))
    }

    pub fn name(&self, class: usize) -> &str {
        &self.names[class]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Test,
}

/// An immutable collection of labeled series sharing one dimensionality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    instances: Vec<SeriesInstance>,
    num_classes: usize,
    dim: usize,
    pub role: Role,
    label_map: LabelMap,
}

impl LabeledDataset {
    pub fn new(instances: Vec<SeriesInstance>, label_map: LabelMap, role: Role) -> Result<Self> {
        let Some(first) = instances.first() else {
            return Err(Error::Format("dataset has no instances".into()));
        };
        let dim = first.dim();
        let num_classes = label_map.len();
        if num_classes < 2 {
            return Err(Error::Format(format!(
                "dataset needs at least 2 classes, found {num_classes}"
            )));
        }
        for inst in &instances {
            if inst.dim() != dim {
                return Err(Error::Format(format!(
                    "instance `{}` has dimension {}, expected {dim}",
                    inst.id,
                    inst.dim()
                )));
            }
            if inst.label >= num_classes {
                return Err(Error::Format(format!(
                    "instance `{}` has label {} outside 0..{num_classes}",
                    inst.id, inst.label
                )));
            }
        }
        Ok(Self {
            instances,
            num_classes,
            dim,
            role,
            label_map,
        })
    }

    /// Loads either format, chosen by extension (`.jsonl`/`.json` is multivariate).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if is_multivariate_path(path) {
            load_multivariate(path)
        } else {
            load_ucr(path)
        }
    }

    /// Loads either format using an existing label map (e.g. a test split aligned to train).
    pub fn load_with_map(path: impl AsRef<Path>, map: &LabelMap) -> Result<Self> {
        let path = path.as_ref();
        if is_multivariate_path(path) {
            load_multivariate_with_map(path, map)
        } else {
            load_ucr_with_map(path, map)
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if is_multivariate_path(path) {
            write_multivariate(self, path)
        } else {
            write_ucr(self, path)
        }
    }

    pub fn instances(&self) -> &[SeriesInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.label_map
    }

    pub fn max_len(&self) -> usize {
        self.instances.iter().map(SeriesInstance::len).max().unwrap_or(0)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for inst in &self.instances {
            counts[inst.label] += 1;
        }
        counts
    }

    pub fn is_complete(&self) -> bool {
        self.instances.iter().all(SeriesInstance::is_complete)
    }

    /// New dataset holding the instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let instances = indices.iter().map(|&i| self.instances[i].clone()).collect();
        Self::new(instances, self.label_map.clone(), self.role)
    }

    /// Applies a fallible per-instance transformation.
    pub fn try_map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&SeriesInstance) -> Result<SeriesInstance>,
    {
        let instances = self.instances.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(instances, self.label_map.clone(), self.role)
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }
}

pub(crate) fn is_multivariate_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl") | Some("json") | Some("ndjson")
    )
}

pub(crate) fn format_value(v: f64) -> String {
    // Display for f64 is the shortest string that parses back to the same value.
    format!("{v}")
}
