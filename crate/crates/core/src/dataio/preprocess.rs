use log::warn;
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, SeriesInstance};
use crate::error::{Error, Result};

pub const DEFAULT_LEAD_SIGMA: f64 = 3.0;
pub const DEFAULT_TRAIL_EPS: f64 = 1e-9;

/// Per-channel min/max observed on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Channels with `max == min`; these normalize to `0.0`.
    #[serde(default)]
    pub degenerate: Vec<usize>,
}

impl NormStats {
    pub fn fit(train: &LabeledDataset) -> Result<Self> {
        let d = train.dim();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for inst in train.instances() {
            inst.require_complete("normalize")?;
            for row in inst.sequence().rows() {
                for (ch, &v) in row.iter().enumerate() {
                    min[ch] = min[ch].min(v);
                    max[ch] = max[ch].max(v);
                }
            }
        }
        let degenerate: Vec<usize> = (0..d).filter(|&ch| max[ch] <= min[ch]).collect();
        for &ch in &degenerate {
            warn!("channel {ch} is constant ({}) on the training split; mapped to 0.0", min[ch]);
        }
        Ok(Self { min, max, degenerate })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Maps one value of channel `ch` into `[0, 1]`, clamping out-of-range values.
    pub fn apply_value(&self, ch: usize, v: f64) -> f64 {
        let span = self.max[ch] - self.min[ch];
        if span <= 0.0 {
            0.0
        } else {
            ((v - self.min[ch]) / span).clamp(0.0, 1.0)
        }
    }

    /// In-place normalization of a single observation, for streaming use.
    pub fn apply_observation(&self, x: &mut [f64]) {
        for (ch, v) in x.iter_mut().enumerate() {
            *v = self.apply_value(ch, *v);
        }
    }

    pub fn apply(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        if data.dim() != self.dim() {
            return Err(Error::shape(format!(
                "normalization stats have {} channels, dataset has {}",
                self.dim(),
                data.dim()
            )));
        }
        data.try_map(|inst| {
            inst.require_complete("normalize")?;
            let d = inst.dim();
            let values = inst
                .values()
                .iter()
                .enumerate()
                .map(|(k, &v)| self.apply_value(k % d, v))
                .collect();
            inst.replaced(values)
        })
    }
}

/// Fits min/max on `train` and maps both splits into `[0, 1]`.
pub fn fit_apply_normalize(
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<(LabeledDataset, LabeledDataset, NormStats)> {
    let stats = NormStats::fit(train)?;
    Ok((stats.apply(train)?, stats.apply(test)?, stats))
}

/// Fills missing entries: linear between the nearest observed neighbours, nearest
/// value past either end. Observed entries are copied untouched.
pub fn interpolate_missing(inst: &SeriesInstance) -> Result<SeriesInstance> {
    if inst.is_complete() {
        return Ok(inst.clone());
    }
    let (len, d) = (inst.len(), inst.dim());
    let mut out = inst.values().to_vec();
    for ch in 0..d {
        let known: Vec<(usize, f64)> = (0..len)
            .filter_map(|t| inst.get(t, ch).map(|v| (t, v)))
            .collect();
        let (Some(&first), Some(&last)) = (known.first(), known.last()) else {
            return Err(Error::Unrecoverable {
                id: inst.id.clone(),
                reason: format!("channel {ch} has no observed values"),
            });
        };
        let mut next = 0;
        for t in 0..len {
            if inst.get(t, ch).is_some() {
                continue;
            }
            while next < known.len() && known[next].0 < t {
                next += 1;
            }
            out[t * d + ch] = if t < first.0 {
                first.1
            } else if t > last.0 {
                last.1
            } else {
                let (p, vp) = known[next - 1];
                let (q, vq) = known[next];
                vp + (vq - vp) * (t - p) as f64 / (q - p) as f64
            };
        }
    }
    inst.replaced(out)
}

/// Drops recording artifacts at both ends of a series.
///
/// Trailing: the maximal run of ticks where every channel is `<= trail_eps`.
/// Leading: starting from the first tick, a tick is dropped while some channel
/// exceeds `mean + lead_sigma * std` of that channel, with mean and (population)
/// std taken over the ticks after it. Scanning stops once fewer than two
/// reference ticks remain.
pub fn trim_artifacts(inst: &SeriesInstance, lead_sigma: f64, trail_eps: f64) -> Result<SeriesInstance> {
    inst.require_complete("trim")?;
    let seq = inst.sequence();
    let d = inst.dim();
    let mut end = seq.len();
    while end > 0 && seq.row(end - 1).iter().all(|&v| v <= trail_eps) {
        end -= 1;
    }
    if end == 0 {
        return Err(Error::Unrecoverable {
            id: inst.id.clone(),
            reason: "trimming removes every tick".into(),
        });
    }
    let mut start = 0;
    while end - start - 1 >= 2 {
        let reference = start + 1..end;
        let n = reference.len() as f64;
        let row = seq.row(start);
        let spike = (0..d).any(|ch| {
            let mean = reference.clone().map(|t| seq.row(t)[ch]).sum::<f64>() / n;
            let var = reference
                .clone()
                .map(|t| (seq.row(t)[ch] - mean).powi(2))
                .sum::<f64>()
                / n;
            row[ch] > mean + lead_sigma * var.sqrt()
        });
        if !spike {
            break;
        }
        start += 1;
    }
    inst.replaced(seq.as_slice()[start * d..end * d].to_vec())
}

/// Replaces consecutive windows of `window` ticks by their per-channel medians.
/// A shorter final window is reduced by its own median.
pub fn median_downsample(inst: &SeriesInstance, window: usize) -> Result<SeriesInstance> {
    if window == 0 {
        return Err(Error::arg("downsampling window must be positive"));
    }
    inst.require_complete("downsample")?;
    let d = inst.dim();
    let seq = inst.sequence();
    let mut out = Vec::with_capacity(seq.len().div_ceil(window) * d);
    let mut buf = Vec::with_capacity(window);
    for start in (0..seq.len()).step_by(window) {
        let stop = (start + window).min(seq.len());
        for ch in 0..d {
            buf.clear();
            buf.extend((start..stop).map(|t| seq.row(t)[ch]));
            out.push(median(&mut buf));
        }
    }
    inst.replaced(out)
}

fn median(buf: &mut [f64]) -> f64 {
    buf.sort_by(f64::total_cmp);
    let n = buf.len();
    if n % 2 == 1 {
        buf[n / 2]
    } else {
        0.5 * (buf[n / 2 - 1] + buf[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{LabelMap, Role};
    use proptest::prelude::*;

    fn uni(values: &[f64]) -> SeriesInstance {
        SeriesInstance::new("x", 0, 1, values.to_vec()).unwrap()
    }

    fn uni_missing(values: &[Option<f64>]) -> SeriesInstance {
        SeriesInstance::with_missing("x", 0, 1, values.to_vec()).unwrap()
    }

    fn dataset(series: &[&[f64]]) -> LabeledDataset {
        let instances = series
            .iter()
            .enumerate()
            .map(|(i, s)| SeriesInstance::new(format!("s{i}"), i % 2, 1, s.to_vec()).unwrap())
            .collect();
        LabeledDataset::new(instances, LabelMap::identity(2), Role::Train).unwrap()
    }

    #[test]
    fn normalize_affine_constant_and_clamp() {
        let train = dataset(&[&[2.0, 4.0, 6.0]]);
        let test = dataset(&[&[8.0, 0.0]]);
        let (tr, te, stats) = fit_apply_normalize(&train, &test).unwrap();
        assert_eq!(tr.instances()[0].values(), &[0.0, 0.5, 1.0]);
        assert_eq!(te.instances()[0].values(), &[1.0, 0.0]);
        assert!(stats.degenerate.is_empty());

        let flat = dataset(&[&[5.0, 5.0, 5.0]]);
        let (tr, _, stats) = fit_apply_normalize(&flat, &flat).unwrap();
        assert_eq!(tr.instances()[0].values(), &[0.0, 0.0, 0.0]);
        assert_eq!(stats.degenerate, vec![0]);
    }

    #[test]
    fn normalize_requires_complete_data() {
        let inst = uni_missing(&[Some(1.0), None]);
        let ds = LabeledDataset::new(vec![inst], LabelMap::identity(2), Role::Train).unwrap();
        assert!(matches!(NormStats::fit(&ds), Err(Error::Argument(_))));
    }

    #[test]
    fn interpolation_cases() {
        let out = interpolate_missing(&uni_missing(&[Some(1.0), None, Some(3.0)])).unwrap();
        assert_eq!(out.values(), &[1.0, 2.0, 3.0]);
        let out = interpolate_missing(&uni_missing(&[None, Some(2.0), None])).unwrap();
        assert_eq!(out.values(), &[2.0, 2.0, 2.0]);
        let err = interpolate_missing(&uni_missing(&[None, None, None])).unwrap_err();
        assert!(matches!(err, Error::Unrecoverable { .. }));
        let out = interpolate_missing(&uni_missing(&[Some(0.0), None, None, Some(3.0)])).unwrap();
        assert_eq!(out.values(), &[0.0, 1.0, 2.0, 3.0]);
        assert!(out.is_complete());
    }

    #[test]
    fn trimming_cases() {
        let out = trim_artifacts(&uni(&[100.0, 0.3, 0.4, 0.0, 0.0]), 2.0, 1e-9).unwrap();
        assert_eq!(out.values(), &[0.3, 0.4]);
        let out = trim_artifacts(&uni(&[0.3, 0.4]), 2.0, 1e-9).unwrap();
        assert_eq!(out.values(), &[0.3, 0.4]);
        let err = trim_artifacts(&uni(&[0.0, 0.0, 0.0]), 2.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::Unrecoverable { .. }));
    }

    #[test]
    fn trimming_needs_every_channel_flat_at_the_tail() {
        let inst = SeriesInstance::new("m", 0, 2, vec![0.5, 0.5, 0.4, 0.6, 0.0, 0.2, 0.0, 0.0]).unwrap();
        let out = trim_artifacts(&inst, 3.0, 1e-9).unwrap();
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn downsample_cases() {
        let out = median_downsample(&uni(&[1.0, 5.0, 2.0, 8.0, 3.0, 9.0]), 3).unwrap();
        assert_eq!(out.values(), &[2.0, 8.0]);
        let x = uni(&[1.0, 5.0, 2.0]);
        assert_eq!(median_downsample(&x, 1).unwrap(), x);
        let out = median_downsample(&uni(&[1.0, 2.0, 3.0, 4.0, 6.0]), 3).unwrap();
        assert_eq!(out.values(), &[2.0, 5.0]);
        assert!(matches!(median_downsample(&x, 0), Err(Error::Argument(_))));
    }

    fn series_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, 1..60)
    }

    proptest! {
        #[test]
        fn downsample_identity_and_length(values in series_strategy(), window in 1usize..10) {
            let x = uni(&values);
            prop_assert_eq!(median_downsample(&x, 1).unwrap(), x.clone());
            let out = median_downsample(&x, window).unwrap();
            prop_assert_eq!(out.len(), values.len().div_ceil(window));
        }

        #[test]
        fn interpolation_keeps_observed_entries(
            cells in prop::collection::vec(prop::option::weighted(0.7, -1e3f64..1e3), 1..40)
        ) {
            prop_assume!(cells.iter().any(Option::is_some));
            let out = interpolate_missing(&uni_missing(&cells)).unwrap();
            for (t, c) in cells.iter().enumerate() {
                if let Some(v) = c {
                    prop_assert_eq!(out.values()[t].to_bits(), v.to_bits());
                }
            }
        }

        #[test]
        fn trimming_returns_a_contiguous_window(values in prop::collection::vec(0.0f64..10.0, 1..40)) {
            if let Ok(out) = trim_artifacts(&uni(&values), 1.0, 0.5) {
                let w = out.values();
                prop_assert!(values.windows(w.len()).any(|win| win == w));
            }
        }

        #[test]
        fn normalization_is_idempotent(a in series_strategy(), b in series_strategy()) {
            let train = dataset(&[&a, &b]);
            let (once, _, _) = fit_apply_normalize(&train, &train).unwrap();
            let (twice, _, _) = fit_apply_normalize(&once, &once).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
