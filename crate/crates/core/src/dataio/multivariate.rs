use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LabelMap, LabeledDataset, Role, SeriesInstance};
use crate::error::{Error, Result};

/// One line of the multivariate JSON-lines layout. `null` marks a missing value.
#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: String,
    label: i64,
    series: Vec<Vec<Option<f64>>>,
}

fn parse_records(path: &Path) -> Result<Vec<(usize, Record)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    let mut dim: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| {
            Error::Format(format!("{}: record on line {line_no}: {e}", path.display()))
        })?;
        if rec.series.is_empty() {
            return Err(Error::Format(format!(
                "{}: record `{}` on line {line_no} has an empty series",
                path.display(),
                rec.id
            )));
        }
        let d = *dim.get_or_insert(rec.series[0].len());
        if let Some((t, v)) = rec.series.iter().enumerate().find(|(_, v)| v.len() != d) {
            return Err(Error::Format(format!(
                "{}: record `{}` on line {line_no} has a vector of length {} at tick {}, expected {d}",
                path.display(),
                rec.id,
                v.len(),
                t + 1
            )));
        }
        out.push((line_no, rec));
    }
    if out.is_empty() {
        return Err(Error::Format(format!("{}: file is empty", path.display())));
    }
    Ok(out)
}

/// Loads a JSON-lines file of `{id, label, series}` records of possibly different lengths.
pub fn load_multivariate(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let records = parse_records(path)?;
    let labels: Vec<String> = records.iter().map(|(_, r)| r.label.to_string()).collect();
    let map = LabelMap::from_labels(labels.iter().map(String::as_str));
    build(path, records, map)
}

pub fn load_multivariate_with_map(path: impl AsRef<Path>, map: &LabelMap) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let records = parse_records(path)?;
    build(path, records, map.clone())
}

fn build(path: &Path, records: Vec<(usize, Record)>, map: LabelMap) -> Result<LabeledDataset> {
    let instances = records
        .into_iter()
        .map(|(line_no, rec)| {
            let label = map.index_of(&rec.label.to_string()).ok_or_else(|| {
                Error::Format(format!(
                    "{}: record `{}` on line {line_no} has unknown label {}",
                    path.display(),
                    rec.id,
                    rec.label
                ))
            })?;
            let dim = rec.series[0].len();
            let flat: Vec<Option<f64>> = rec.series.into_iter().flatten().collect();
            SeriesInstance::with_missing(rec.id, label, dim, flat)
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(instances, map, Role::Train)
}

/// Writes the JSON-lines layout. Labels are written using their original names,
/// which must be integers.
pub fn write_multivariate(dataset: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::new();
    for inst in dataset.instances() {
        let name = dataset.label_map().name(inst.label);
        let label: i64 = name.parse().map_err(|_| {
            Error::arg(format!("label `{name}` is not an integer; cannot write JSON lines"))
        })?;
        let series = (0..inst.len())
            .map(|t| (0..inst.dim()).map(|ch| inst.get(t, ch)).collect())
            .collect();
        let rec = Record {
            id: inst.id.clone(),
            label,
            series,
        };
        serde_json::to_writer(&mut out, &rec).map_err(|e| Error::Persistence(e.to_string()))?;
        writeln!(out)?;
    }
    fs::write(path, out)?;
    Ok(())
}
