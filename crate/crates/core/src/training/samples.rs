use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::benefit::{targets_for, BenefitSpec};
use crate::dataio::{LabeledDataset, SeriesInstance};
use crate::error::{Error, Result};
use crate::neural::{PrefixSample, SeriesTargets};

/// 1-based prefix end ticks `1, 1 + stride, ...` with `len` always included.
pub fn prefix_ticks(len: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let mut ticks: Vec<usize> = (1..=len).step_by(stride).collect();
    if ticks.last() != Some(&len) && len > 0 {
        ticks.push(len);
    }
    ticks
}

/// Every prefix of one series paired with the benefit target of `model_class`.
pub fn series_targets<'a>(
    spec: &BenefitSpec,
    inst: &'a SeriesInstance,
    model_class: usize,
    stride: usize,
) -> Result<SeriesTargets<'a>> {
    inst.require_complete("training")?;
    let all = targets_for(spec, inst.label, inst.len(), model_class)?;
    let ticks = prefix_ticks(inst.len(), stride);
    let targets = ticks.iter().map(|&t| all.at(t)).collect();
    Ok(SeriesTargets {
        series: inst.sequence(),
        ticks,
        targets,
    })
}

/// Groups the prefixes of each instance so one recurrent pass serves them all.
pub fn group_series_targets<'a>(
    spec: &BenefitSpec,
    instances: impl IntoIterator<Item = &'a SeriesInstance>,
    model_class: usize,
    stride: usize,
) -> Result<Vec<SeriesTargets<'a>>> {
    check_stride(stride)?;
    instances
        .into_iter()
        .map(|inst| series_targets(spec, inst, model_class, stride))
        .collect()
}

/// Flat list of `(prefix, target)` training samples.
pub fn make_prefix_samples<'a>(
    dataset: &'a LabeledDataset,
    spec: &BenefitSpec,
    model_class: usize,
    stride: usize,
) -> Result<Vec<PrefixSample<'a>>> {
    let groups = group_series_targets(spec, dataset.instances(), model_class, stride)?;
    Ok(groups
        .iter()
        .flat_map(|g| {
            g.ticks.iter().zip(&g.targets).map(|(&t, &target)| PrefixSample {
                prefix: g.series.prefix(t),
                target,
            })
        })
        .collect())
}

pub(crate) fn check_stride(stride: usize) -> Result<()> {
    if stride == 0 {
        return Err(Error::Config("prefix stride must be >= 1".into()));
    }
    Ok(())
}

/// Sequence-level train/validation split, stratified by label.
///
/// The validation side gets `max(1, n - floor(n * frac))` instances, shared out
/// across classes by largest remainder while leaving every class at least one
/// training instance. Returns sorted index lists `(train, val)`.
pub fn split_indices(labels: &[usize], frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::arg(format!("need at least 2 instances to split, got {n}")));
    }
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::Config(format!("train fraction must lie in (0, 1], got {frac}")));
    }
    let n_val = (n - (n as f64 * frac + 1e-9).floor() as usize).clamp(1, n - 1);
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut val = Vec::with_capacity(n_val);
    let present: Vec<&Vec<usize>> = by_class.iter().filter(|c| !c.is_empty()).collect();
    if present.iter().any(|c| c.len() < 2) {
        warn!("a class has fewer than 2 instances; falling back to an unstratified split");
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        val.extend_from_slice(&all[..n_val]);
    } else {
        let alloc = allocate(&by_class, n_val);
        for (members, &k) in by_class.iter().zip(&alloc) {
            let mut members = members.clone();
            members.shuffle(&mut rng);
            val.extend_from_slice(&members[..k]);
        }
    }
    val.sort_unstable();
    let mut is_val = vec![false; n];
    for &i in &val {
        is_val[i] = true;
    }
    let train = (0..n).filter(|&i| !is_val[i]).collect();
    Ok((train, val))
}

/// Largest-remainder apportionment of `total` over class sizes, capped at `size - 1`.
fn allocate(by_class: &[Vec<usize>], total: usize) -> Vec<usize> {
    let n: usize = by_class.iter().map(Vec::len).sum();
    let quotas: Vec<f64> = by_class
        .iter()
        .map(|c| total as f64 * c.len() as f64 / n as f64)
        .collect();
    let caps: Vec<usize> = by_class.iter().map(|c| c.len().saturating_sub(1)).collect();
    let mut alloc: Vec<usize> = quotas
        .iter()
        .zip(&caps)
        .map(|(q, &cap)| (q.floor() as usize).min(cap))
        .collect();
    let mut order: Vec<usize> = (0..by_class.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = total - alloc.iter().sum::<usize>();
    while left > 0 {
        let before = left;
        for &c in &order {
            if left > 0 && alloc[c] < caps[c] {
                alloc[c] += 1;
                left -= 1;
            }
        }
        if left == before {
            break;
        }
    }
    alloc
}

/// Splits a dataset into `(train, val)` subsets; see [`split_indices`].
pub fn split_train_val(dataset: &LabeledDataset, frac: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    let labels: Vec<usize> = dataset.instances().iter().map(|i| i.label).collect();
    let (train, val) = split_indices(&labels, frac, seed)?;
    Ok((dataset.subset(&train)?, dataset.subset(&val)?))
}
