//! Exact k-nearest-neighbor retrieval by kernel similarity.
//!
//! A linear scan keeps a bounded max-heap of the current worst retained
//! candidate. Ordering is by similarity descending, ties by ascending dataset
//! index, so results are reproducible across platforms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::data::{norm, EmbeddingSet};
use crate::error::{NnkError, Result};
use crate::kernel::KernelSpec;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NeighborList {
    pub indices: Vec<usize>,
    pub similarities: Vec<f64>,
}

impl NeighborList {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Clone, Copy)]
struct Scored {
    similarity: f64,
    index: usize,
}

// "Greater" means "worse": lower similarity, or equal similarity and a larger index.
impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .similarity
            .total_cmp(&self.similarity)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Scored {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scored {}

pub fn knn(
    spec: &KernelSpec,
    points: &EmbeddingSet,
    query: &[f32],
    k: usize,
    exclude: &[usize],
) -> Result<NeighborList> {
    spec.check_points(points)?;
    if query.len() != points.dim() {
        return Err(NnkError::Dimension {
            expected: points.dim(),
            actual: query.len(),
        });
    }
    let query_norm = norm(query);
    spec.check_norm(query_norm, usize::MAX)
        .map_err(|_| NnkError::invalid("query has zero norm"))?;
    knn_unchecked(spec, points, query, query_norm, k, exclude)
}

/// [`knn`] for callers that already validated the kernel, points and query.
pub(crate) fn knn_unchecked(
    spec: &KernelSpec,
    points: &EmbeddingSet,
    query: &[f32],
    query_norm: f64,
    k: usize,
    exclude: &[usize],
) -> Result<NeighborList> {
    if k == 0 {
        return Err(NnkError::invalid("k must be at least 1"));
    }
    let mut heap = BinaryHeap::with_capacity(k + 1);
    for index in 0..points.len() {
        if exclude.contains(&index) {
            continue;
        }
        let candidate = Scored {
            similarity: spec.similarity(points.row(index), points.row_norm(index), query, query_norm),
            index,
        };
        if heap.len() < k {
            heap.push(candidate);
        } else if candidate < *heap.peek().expect("heap holds k > 0 entries") {
            heap.pop();
            heap.push(candidate);
        }
    }
    if heap.is_empty() {
        return Err(NnkError::EmptyCandidates);
    }
    let sorted = heap.into_sorted_vec();
    Ok(NeighborList {
        indices: sorted.iter().map(|s| s.index).collect(),
        similarities: sorted.iter().map(|s| s.similarity).collect(),
    })
}
