use std::fs;
use std::io::Write;
use std::path::Path;

use super::{format_value, LabelMap, LabeledDataset, Role, SeriesInstance};
use crate::error::{Error, Result};

#[derive(Clone, Copy)]
enum Delimiter {
    Tab,
    Comma,
    Whitespace,
}

impl Delimiter {
    fn detect(line: &str) -> Self {
        if line.contains('\t') {
            Delimiter::Tab
        } else if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(self, line: &'a str) -> Vec<&'a str> {
        match self {
            Delimiter::Tab => line.split('\t').map(str::trim).collect(),
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

struct RawRow {
    line_no: usize,
    label: String,
    values: Vec<Option<f64>>,
}

fn parse_rows(path: &Path) -> Result<Vec<RawRow>> {
    let text = fs::read_to_string(path)?;
    let mut delim = None;
    let mut rows = Vec::new();
    let mut expected_len = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let d = *delim.get_or_insert_with(|| Delimiter::detect(line));
        let fields = d.split(line.trim_end_matches('\r'));
        if fields.len() < 2 {
            return Err(Error::Format(format!(
                "{}: row {line_no} has a label but no values",
                path.display()
            )));
        }
        let values = fields[1..]
            .iter()
            .map(|f| parse_cell(f).ok_or_else(|| {
                Error::Format(format!(
                    "{}: row {line_no} has non-numeric cell `{f}`",
                    path.display()
                ))
            }))
            .collect::<Result<Vec<_>>>()?;
        match expected_len {
            None => expected_len = Some(values.len()),
            Some(n) if n != values.len() => {
                return Err(Error::Format(format!(
                    "{}: row {line_no} has {} values, expected {n}",
                    path.display(),
                    values.len()
                )))
            }
            _ => {}
        }
        rows.push(RawRow {
            line_no,
            label: fields[0].to_string(),
            values,
        });
    }
    if rows.is_empty() {
        return Err(Error::Format(format!("{}: file is empty", path.display())));
    }
    Ok(rows)
}

/// `Some(None)` for a missing marker, `None` for garbage.
fn parse_cell(cell: &str) -> Option<Option<f64>> {
    if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
        return Some(None);
    }
    let v: f64 = cell.parse().ok()?;
    v.is_finite().then_some(Some(v))
}

/// Loads a UCR-archive file (label followed by `L` values per row).
///
/// Labels are remapped to `0..C` with [`LabelMap::from_labels`]; `NaN` cells are
/// read as missing.
pub fn load_ucr(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let rows = parse_rows(path)?;
    let map = LabelMap::from_labels(rows.iter().map(|r| r.label.as_str()));
    build(path, rows, map)
}

/// Like [`load_ucr`] but remaps labels through an existing map.
pub fn load_ucr_with_map(path: impl AsRef<Path>, map: &LabelMap) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let rows = parse_rows(path)?;
    build(path, rows, map.clone())
}

fn build(path: &Path, rows: Vec<RawRow>, map: LabelMap) -> Result<LabeledDataset> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("row")
        .to_string();
    let instances = rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let label = map.index_of(&row.label).ok_or_else(|| {
                Error::Format(format!(
                    "{}: row {} has unknown label `{}`",
                    path.display(),
                    row.line_no,
                    row.label
                ))
            })?;
            SeriesInstance::with_missing(format!("{stem}-{i}"), label, 1, row.values)
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(instances, map, Role::Train)
}

/// Writes a univariate, fixed-length dataset in tab-separated UCR layout.
pub fn write_ucr(dataset: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    if dataset.dim() != 1 {
        return Err(Error::arg("UCR layout holds univariate series only"));
    }
    let len = dataset.instances()[0].len();
    if dataset.instances().iter().any(|i| i.len() != len) {
        return Err(Error::arg("UCR layout requires equal-length series"));
    }
    let mut out = Vec::new();
    for inst in dataset.instances() {
        write!(out, "{}", dataset.label_map().name(inst.label))?;
        for t in 0..inst.len() {
            match inst.get(t, 0) {
                Some(v) => write!(out, "\t{}", format_value(v))?,
                None => write!(out, "\tNaN")?,
            }
        }
        writeln!(out)?;
    }
    fs::write(path, out)?;
    Ok(())
}
