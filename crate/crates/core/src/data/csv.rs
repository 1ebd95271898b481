//! CSV layout: header `id,f0,...,f{d-1}[,label]`, one record per line.
//!
//! Row numbers in errors are 0-based record indices (the header is not counted).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::EmbeddingSet;
use crate::error::{NnkError, Result};

struct Header {
    dim: usize,
    has_label: bool,
}

fn parse_header(line: &str) -> Result<Header> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    if cols.first() != Some(&"id") {
        return Err(NnkError::Header(format!(
            "first column must be `id`, found `{}`",
            cols.first().unwrap_or(&"")
        )));
    }
    let has_label = cols.last() == Some(&"label");
    let features = &cols[1..cols.len() - usize::from(has_label)];
    if features.is_empty() {
        return Err(NnkError::Header("no feature columns".into()));
    }
    for (i, name) in features.iter().enumerate() {
        if *name != format!("f{i}") {
            return Err(NnkError::Header(format!(
                "expected column `f{i}`, found `{name}`"
            )));
        }
    }
    Ok(Header {
        dim: features.len(),
        has_label,
    })
}

fn records(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
}

/// Reads embeddings and, when the header ends in `label`, the label column.
pub fn read_csv(path: &Path) -> Result<(EmbeddingSet, Option<Vec<u32>>)> {
    let text = fs::read_to_string(path).map_err(|e| NnkError::io(path, e))?;
    let mut lines = records(&text);
    let header = parse_header(
        lines
            .next()
            .ok_or_else(|| NnkError::Header(format!("{}: empty file", path.display())))?,
    )?;
    let width = 1 + header.dim + usize::from(header.has_label);

    let mut ids = Vec::new();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(NnkError::Row {
                row,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let id = fields[0].parse::<u64>().map_err(|e| NnkError::Row {
            row,
            message: format!("bad id `{}`: {e}", fields[0]),
        })?;
        ids.push(id);
        for (column, field) in fields[1..=header.dim].iter().enumerate() {
            let v = field.parse::<f32>().map_err(|e| NnkError::Row {
                row,
                message: format!("bad value `{field}` in column f{column}: {e}"),
            })?;
            if !v.is_finite() {
                return Err(NnkError::NonFinite { row, column });
            }
            values.push(v);
        }
        if header.has_label {
            let field = fields[width - 1];
            labels.push(field.parse::<u32>().map_err(|e| NnkError::Row {
                row,
                message: format!("bad label `{field}`: {e}"),
            })?);
        }
    }
    if ids.is_empty() {
        return Err(NnkError::Header(format!("{}: no records", path.display())));
    }
    let points = EmbeddingSet::new(ids, header.dim, values)?;
    Ok((points, header.has_label.then_some(labels)))
}

pub fn write_csv(path: &Path, points: &EmbeddingSet, labels: Option<&[u32]>) -> Result<()> {
    let mut out = String::from("id");
    for i in 0..points.dim() {
        let _ = write!(out, ",f{i}");
    }
    if labels.is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for (i, row) in points.rows().enumerate() {
        let _ = write!(out, "{}", points.id(i));
        for v in row {
            // `Display` for f32 is the shortest representation that parses back exactly.
            let _ = write!(out, ",{v}");
        }
        if let Some(labels) = labels {
            let _ = write!(out, ",{}", labels[i]);
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| NnkError::io(path, e))
}

/// Reads a `id,predicted_label` file.
pub fn load_predictions(path: &Path) -> Result<HashMap<u64, u32>> {
    let text = fs::read_to_string(path).map_err(|e| NnkError::io(path, e))?;
    let mut lines = records(&text);
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| NnkError::Header(format!("{}: empty file", path.display())))?
        .split(',')
        .map(str::trim)
        .collect();
    if header != ["id", "predicted_label"] {
        return Err(NnkError::Header(format!(
            "expected `id,predicted_label`, found `{}`",
            header.join(",")
        )));
    }
    let mut predictions = HashMap::new();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [id, label] = fields[..] else {
            return Err(NnkError::Row {
                row,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        };
        let id = id.parse::<u64>().map_err(|e| NnkError::Row {
            row,
            message: format!("bad id `{id}`: {e}"),
        })?;
        let label = label.parse::<u32>().map_err(|e| NnkError::Row {
            row,
            message: format!("bad label `{label}`: {e}"),
        })?;
        if predictions.insert(id, label).is_some() {
            return Err(NnkError::DuplicateId { row, id });
        }
    }
    Ok(predictions)
}

pub fn save_predictions(path: &Path, predictions: &[(u64, u32)]) -> Result<()> {
    let mut out = String::from("id,predicted_label\n");
    for (id, label) in predictions {
        let _ = writeln!(out, "{id},{label}");
    }
    fs::write(path, out).map_err(|e| NnkError::io(path, e))
}
