//! Embedding datasets, label vectors and their on-disk formats.
//!
//! Embeddings are kept as `f32` exactly as read from disk; every consumer
//! widens to `f64` before accumulating. Row norms are cached at construction
//! because the cosine kernel needs them on every evaluation.

mod binary;
mod csv;

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NnkError, Result};

pub use self::binary::{read_binary, write_binary, BINARY_MAGIC, BINARY_VERSION};
pub use self::csv::{load_predictions, read_csv, save_predictions, write_csv};

/// On-disk dataset encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Binary,
}

impl DataFormat {
    /// `.bin` and `.nnkd` files are binary, anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("nnkd") => DataFormat::Binary,
            _ => DataFormat::Csv,
        }
    }
}

impl std::str::FromStr for DataFormat {
    type Err = NnkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DataFormat::Csv),
            "binary" | "bin" => Ok(DataFormat::Binary),
            other => Err(NnkError::invalid(format!("unknown format `{other}`"))),
        }
    }
}

/// A single validated embedding: finite `f32` activations.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if let Some(column) = values.iter().position(|v| !v.is_finite()) {
            return Err(NnkError::NonFinite { row: 0, column });
        }
        Ok(Self(values))
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| v as f32).collect())
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl AsRef<[f32]> for EmbeddingVector {
    fn as_ref(&self) -> &[f32] {
        &self.0
    }
}

/// Euclidean norm with `f64` accumulation.
///
/// Every kernel path calls this one function so cached and on-the-fly norms
/// agree bit for bit.
pub fn norm(values: &[f32]) -> f64 {
    values
        .iter()
        .map(|&v| {
            let v = v as f64;
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Row-major matrix of embeddings with record ids and cached row norms.
#[derive(Clone, Debug)]
pub struct EmbeddingSet {
    ids: Vec<u64>,
    dim: usize,
    values: Vec<f32>,
    norms: Vec<f64>,
}

impl EmbeddingSet {
    pub fn new(ids: Vec<u64>, dim: usize, values: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(NnkError::Header("embedding dimension must be at least 1".into()));
        }
        if values.len() != ids.len() * dim {
            return Err(NnkError::Dimension {
                expected: ids.len() * dim,
                actual: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(NnkError::NonFinite {
                row: pos / dim,
                column: pos % dim,
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for (row, &id) in ids.iter().enumerate() {
            if !seen.insert(id) {
                return Err(NnkError::DuplicateId { row, id });
            }
        }
        let norms = values.chunks_exact(dim).map(norm).collect();
        Ok(Self {
            ids,
            dim,
            values,
            norms,
        })
    }

    /// Builds a set from `f64` rows, assigning ids `0..n`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(NnkError::Row {
                    row,
                    message: format!("expected {dim} values, found {}", r.len()),
                });
            }
            values.extend(r.iter().map(|&v| v as f32));
        }
        Self::new((0..rows.len() as u64).collect(), dim, values)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> u64 {
        self.ids[index]
    }

    pub fn row(&self, index: usize) -> &[f32] {
        &self.values[index * self.dim..(index + 1) * self.dim]
    }

    pub fn row_norm(&self, index: usize) -> f64 {
        self.norms[index]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.iter().map(|&i| self.ids[i]).collect(), self.dim, values)
    }
}

/// Embeddings with integer class labels in `[0, num_classes)`.
///
/// Immutable once built; all evaluation code borrows it read-only.
#[derive(Clone, Debug)]
pub struct LabeledDataset {
    points: EmbeddingSet,
    labels: Vec<u32>,
    num_classes: u32,
}

impl LabeledDataset {
    pub fn new(points: EmbeddingSet, labels: Vec<u32>, num_classes: u32) -> Result<Self> {
        if points.is_empty() {
            return Err(NnkError::Header("dataset has no records".into()));
        }
        if num_classes < 2 {
            return Err(NnkError::Header(format!(
                "at least 2 classes required, got {num_classes}"
            )));
        }
        if labels.len() != points.len() {
            return Err(NnkError::Dimension {
                expected: points.len(),
                actual: labels.len(),
            });
        }
        if let Some(row) = labels.iter().position(|&l| l >= num_classes) {
            return Err(NnkError::LabelOutOfRange {
                row,
                label: labels[row],
                num_classes,
            });
        }
        Ok(Self {
            points,
            labels,
            num_classes,
        })
    }

    /// Infers the class count as `max(label) + 1`, with a floor of two.
    pub fn with_inferred_classes(points: EmbeddingSet, labels: Vec<u32>) -> Result<Self> {
        let num_classes = labels.iter().max().map_or(2, |&m| (m + 1).max(2));
        Self::new(points, labels, num_classes)
    }

    pub fn points(&self) -> &EmbeddingSet {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    pub fn id(&self, index: usize) -> u64 {
        self.points.id(index)
    }

    pub fn row(&self, index: usize) -> &[f32] {
        self.points.row(index)
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(self.points.select(indices)?, labels, self.num_classes)
    }

    /// Same embeddings and ids with replaced labels.
    pub fn relabel(&self, labels: Vec<u32>) -> Result<Self> {
        Self::new(self.points.clone(), labels, self.num_classes)
    }
}

/// Class-probability vector; one-hot for observed labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelVector(Vec<f64>);

impl LabelVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub fn one_hot(label: u32, num_classes: u32) -> Result<LabelVector> {
    if label >= num_classes {
        return Err(NnkError::ClassOutOfRange { label, num_classes });
    }
    let mut v = vec![0.0; num_classes as usize];
    v[label as usize] = 1.0;
    Ok(LabelVector(v))
}

pub fn load_dataset(path: impl AsRef<Path>, format: DataFormat) -> Result<LabeledDataset> {
    let path = path.as_ref();
    match format {
        DataFormat::Csv => {
            let (points, labels) = read_csv(path)?;
            let labels = labels.ok_or_else(|| {
                NnkError::Header(format!("{}: missing `label` column", path.display()))
            })?;
            LabeledDataset::with_inferred_classes(points, labels)
        }
        DataFormat::Binary => read_binary(path),
    }
}


pub fn save_dataset(
    dataset: &LabeledDataset,
    path: impl AsRef<Path>,
    format: DataFormat,
) -> Result<()> {
    match format {
        DataFormat::Csv => write_csv(path.as_ref(), dataset.points(), Some(dataset.labels())),
        DataFormat::Binary => write_binary(path.as_ref(), dataset),
    }
}

/// Loads query embeddings; a label column or binary label block is ignored.
pub fn load_embeddings(path: impl AsRef<Path>, format: DataFormat) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    match format {
        DataFormat::Csv => read_csv(path).map(|(points, _)| points),
        DataFormat::Binary => read_binary(path).map(|d| d.points),
    }
}

/// Deterministic disjoint split into `(train, holdout)`.
///
/// The holdout receives `floor(n * fraction)` points, clamped so both sides
/// keep at least one. Within each side the original record order is kept.
pub fn split(
    dataset: &LabeledDataset,
    holdout_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let n = dataset.len();
    if n < 2 {
        return Err(NnkError::invalid("split needs at least 2 records"));
    }
    if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
        return Err(NnkError::invalid(format!(
            "holdout fraction {holdout_fraction} is not in (0, 1)"
        )));
    }
    let holdout_len = ((n as f64 * holdout_fraction).floor() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut holdout: Vec<usize> = order[..holdout_len].to_vec();
    let mut train: Vec<usize> = order[holdout_len..].to_vec();
    holdout.sort_unstable();
    train.sort_unstable();
    Ok((dataset.subset(&train)?, dataset.subset(&holdout)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> LabeledDataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 + 1.0, 1.0]).collect();
        let labels = (0..n).map(|i| (i % 2) as u32).collect();
        LabeledDataset::new(EmbeddingSet::from_rows(&rows).unwrap(), labels, 2).unwrap()
    }

    #[test]
    fn one_hot_definition() {
        assert_eq!(one_hot(1, 3).unwrap().as_slice(), &[0.0, 1.0, 0.0]);
        assert_eq!(one_hot(0, 2).unwrap().as_slice(), &[1.0, 0.0]);
        assert!(matches!(
            one_hot(5, 3),
            Err(NnkError::ClassOutOfRange { label: 5, .. })
        ));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = toy(10);
        let (train, holdout) = split(&d, 0.2, 7).unwrap();
        assert_eq!((train.len(), holdout.len()), (8, 2));

        let (train2, holdout2) = split(&d, 0.2, 7).unwrap();
        assert_eq!(train.points().ids(), train2.points().ids());
        assert_eq!(holdout.points().ids(), holdout2.points().ids());

        let mut all: Vec<u64> = train.points().ids().to_vec();
        all.extend_from_slice(holdout.points().ids());
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<u64>>());
    }

    #[test]
    fn split_keeps_one_point_per_side() {
        let d = toy(2);
        let (train, holdout) = split(&d, 0.999, 3).unwrap();
        assert_eq!((train.len(), holdout.len()), (1, 1));
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let d = toy(4);
        assert!(split(&d, 0.0, 1).is_err());
        assert!(split(&d, 1.0, 1).is_err());
        assert!(split(&toy(1), 0.5, 1).is_err());
    }

    #[test]
    fn dataset_validation() {
        let points = EmbeddingSet::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(
            LabeledDataset::new(points.clone(), vec![0, 3], 2),
            Err(NnkError::LabelOutOfRange { row: 1, .. })
        ));
        assert!(LabeledDataset::new(points, vec![0, 1], 1).is_err());
        assert!(matches!(
            EmbeddingSet::new(vec![4, 4], 1, vec![0.0, 1.0]),
            Err(NnkError::DuplicateId { row: 1, id: 4 })
        ));
        assert!(matches!(
            EmbeddingSet::new(vec![0, 1], 2, vec![0.0, 1.0, f32::NAN, 1.0]),
            Err(NnkError::NonFinite { row: 1, column: 0 })
        ));
    }

    #[test]
    fn inferred_classes_have_floor_of_two() {
        let points = EmbeddingSet::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let d = LabeledDataset::with_inferred_classes(points, vec![0, 0]).unwrap();
        assert_eq!(d.num_classes(), 2);
    }
}
