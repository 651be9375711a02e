//! Synthetic two-outcome multivariate data with variable lengths.
//!
//! Favorable (class 0) series are stationary noise around a per-channel level.
//! Unfavorable (class 1) series add a linear ramp to a fixed random subset of
//! channels, so evidence accumulates with time.

use std::fs;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataio::{write_multivariate, LabelMap, LabeledDataset, Role, SeriesInstance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub dim: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Rise of the ramp over `max_len` ticks.
    pub drift: f64,
    /// Standard deviation of the additive noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 200,
            dim: 8,
            min_len: 24,
            max_len: 96,
            drift: 1.0,
            noise: 0.3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthInstanceTruth {
    pub id: String,
    pub label: usize,
    pub len: usize,
}

/// Ground truth written next to the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub config: SynthConfig,
    pub drift_channels: Vec<usize>,
    pub instances: Vec<SynthInstanceTruth>,
}

pub fn synth_outcome_dataset(cfg: &SynthConfig) -> Result<(LabeledDataset, SynthTruth)> {
    if cfg.n < 4 {
        return Err(Error::arg(format!("need at least 4 instances, got {}", cfg.n)));
    }
    if cfg.dim == 0 {
        return Err(Error::arg("dimension must be >= 1"));
    }
    if cfg.min_len == 0 || cfg.min_len > cfg.max_len {
        return Err(Error::arg(format!("invalid length range {}..={}", cfg.min_len, cfg.max_len)));
    }
    if !(cfg.drift >= 0.0 && cfg.drift.is_finite()) {
        return Err(Error::arg(format!("drift must be >= 0, got {}", cfg.drift)));
    }
    let noise = Normal::new(0.0, cfg.noise).map_err(|e| Error::arg(format!("noise: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let k = cfg.dim.div_ceil(4);
    let mut drift_channels = index::sample(&mut rng, cfg.dim, k).into_vec();
    drift_channels.sort_unstable();
    let levels: Vec<f64> = (0..cfg.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut labels: Vec<usize> = (0..cfg.n).map(|i| i % 2).collect();
    labels.shuffle(&mut rng);

    let slope = cfg.drift / cfg.max_len as f64;
    let mut instances = Vec::with_capacity(cfg.n);
    let mut truth = Vec::with_capacity(cfg.n);
    for (i, &label) in labels.iter().enumerate() {
        let len = rng.random_range(cfg.min_len..=cfg.max_len);
        let mut values = Vec::with_capacity(len * cfg.dim);
        for t in 1..=len {
            for (ch, level) in levels.iter().enumerate() {
                let mut v = level + noise.sample(&mut rng);
                if label == 1 && drift_channels.binary_search(&ch).is_ok() {
                    v += slope * t as f64;
                }
                values.push(v);
            }
        }
        let id = format!("synth-{i}");
        truth.push(SynthInstanceTruth {
            id: id.clone(),
            label,
            len,
        });
        instances.push(SeriesInstance::new(id, label, cfg.dim, values)?);
    }
    let names = vec!["0".to_string(), "1".to_string()];
    let data = LabeledDataset::new(instances, LabelMap::new(names), Role::Train)?;
    Ok((
        data,
        SynthTruth {
            config: cfg.clone(),
            drift_channels,
            instances: truth,
        },
    ))
}

/// Writes `<stem>.jsonl` and `<stem>.truth.json` into `dir`.
pub fn write_synth(dir: impl AsRef<Path>, stem: &str, data: &LabeledDataset, truth: &SynthTruth) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_multivariate(data, dir.join(format!("{stem}.jsonl")))?;
    let text = serde_json::to_string_pretty(truth).map_err(|e| Error::Persistence(e.to_string()))?;
    fs::write(dir.join(format!("{stem}.truth.json")), text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_balance() {
        let (d, truth) = synth_outcome_dataset(&SynthConfig::default()).unwrap();
        assert_eq!(d.len(), 200);
        assert_eq!(d.dim(), 8);
        assert_eq!(d.class_counts(), vec![100, 100]);
        assert!(d.instances().iter().all(|i| (24..=96).contains(&i.len())));
        assert_eq!(truth.drift_channels.len(), 2);
    }

    #[test]
    fn deterministic_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig { n: 10, seed: 3, ..SynthConfig::default() };
        for sub in ["a", "b"] {
            let (d, t) = synth_outcome_dataset(&cfg).unwrap();
            write_synth(dir.path().join(sub), "s", &d, &t).unwrap();
        }
        for f in ["s.jsonl", "s.truth.json"] {
            let a = fs::read(dir.path().join("a").join(f)).unwrap();
            let b = fs::read(dir.path().join("b").join(f)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn bad_ranges() {
        let bad = SynthConfig { min_len: 50, max_len: 10, ..SynthConfig::default() };
        assert!(matches!(synth_outcome_dataset(&bad), Err(Error::Argument(_))));
        let few = SynthConfig { n: 3, ..SynthConfig::default() };
        assert!(synth_outcome_dataset(&few).is_err());
    }
}
