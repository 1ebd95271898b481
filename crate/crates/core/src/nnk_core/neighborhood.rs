use serde::Serialize;

use super::solver::{kkt_residual, solve_nnk, NnkWeights, DUPLICATE_EPS};
use crate::data::{norm, EmbeddingSet};
use crate::error::{NnkError, Result};
use crate::kernel::{slice_unchecked, KernelSlice, KernelSpec};
use crate::neighbors::{knn_unchecked, NeighborList};

/// One interpolating neighbor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportEntry {
    /// Position in the candidate list.
    pub position: usize,
    /// Dataset row index.
    pub index: usize,
    /// Interpolation coefficient: the raw weight, or 1 for the 1-NN fallback.
    pub theta: f64,
    /// `theta / sum(theta)` over the support.
    pub weight: f64,
}

/// Sparse NNK neighborhood of a single query.
#[derive(Clone, Debug)]
pub struct NnkNeighborhood {
    pub query_id: Option<u64>,
    pub candidates: NeighborList,
    pub weights: NnkWeights,
    pub support: Vec<SupportEntry>,
    pub k_hat: usize,
    pub diameter: f64,
    /// No usable support; the nearest candidate stands in with weight 1.
    pub fallback: bool,
    pub slice: KernelSlice,
}

impl NnkNeighborhood {
    /// Normalized weights aligned with the candidate list.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.candidates.len()];
        for s in &self.support {
            w[s.position] = s.weight;
        }
        w
    }

    pub fn support_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.iter().map(|s| s.index)
    }
}

/// Largest kernel-space distance `sqrt(2 - 2 K_ij)` between any two points of
/// the slice; 0 for fewer than two points.
pub fn polytope_diameter(support_slice: &KernelSlice) -> f64 {
    let m = support_slice.len();
    let mut max_sq: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            max_sq = max_sq.max(2.0 - 2.0 * support_slice.kss(i, j));
        }
    }
    max_sq.max(0.0).sqrt()
}

/// Positions to keep after removing kernel duplicates; of each duplicate
/// pair the candidate with the larger dataset index is dropped.
fn deduplicate(slice: &KernelSlice, candidates: &[usize]) -> Vec<bool> {
    let k = candidates.len();
    let mut keep = vec![true; k];
    for a in 0..k {
        if !keep[a] {
            continue;
        }
        for b in a + 1..k {
            if keep[b] && slice.kss(a, b) >= 1.0 - DUPLICATE_EPS {
                if candidates[a] < candidates[b] {
                    keep[b] = false;
                } else {
                    keep[a] = false;
                    break;
                }
            }
        }
    }
    keep
}

/// Solves on the non-duplicate candidates and scatters back to full length.
fn solve_deduplicated(slice: &KernelSlice, candidates: &[usize], tol: f64) -> Result<NnkWeights> {
    let mut keep = deduplicate(slice, candidates);
    loop {
        let positions: Vec<usize> = (0..slice.len()).filter(|&p| keep[p]).collect();
        match solve_nnk(&slice.restrict(&positions), tol) {
            Ok(reduced) => {
                let mut theta = vec![0.0; slice.len()];
                for (r, &p) in positions.iter().enumerate() {
                    theta[p] = reduced.theta[r];
                }
                let support = reduced.support.iter().map(|&r| positions[r]).collect();
                return Ok(NnkWeights {
                    theta,
                    support,
                    objective_value: reduced.objective_value,
                });
            }
            Err(NnkError::Degenerate { first, second }) => {
                let (a, b) = (positions[first], positions[second]);
                if candidates[a] < candidates[b] {
                    keep[b] = false;
                } else {
                    keep[a] = false;
                }
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn nnk_neighborhood(
    spec: &KernelSpec,
    points: &EmbeddingSet,
    query: &[f32],
    k: usize,
    tol: f64,
    exclude: &[usize],
) -> Result<NnkNeighborhood> {
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
    neighborhood_unchecked(spec, points, query, query_norm, k, tol, exclude)
}

/// [`nnk_neighborhood`] for callers that validated points and query once.
pub(crate) fn neighborhood_unchecked(
    spec: &KernelSpec,
    points: &EmbeddingSet,
    query: &[f32],
    query_norm: f64,
    k: usize,
    tol: f64,
    exclude: &[usize],
) -> Result<NnkNeighborhood> {
    let candidates = knn_unchecked(spec, points, query, query_norm, k, exclude)?;
    let slice = slice_unchecked(spec, points, &candidates.indices, query, query_norm);
    let weights = solve_deduplicated(&slice, &candidates.indices, tol)?;

    debug_assert!(
        kkt_residual(&slice, &weights.theta)
            .map(|r| r.is_optimal(tol))
            .unwrap_or(false),
        "NNK solution fails KKT certification"
    );

    let total = weights.weight_sum();
    let (support, fallback) = if total > tol {
        let entries = weights
            .support
            .iter()
            .map(|&p| SupportEntry {
                position: p,
                index: candidates.indices[p],
                theta: weights.theta[p],
                weight: weights.theta[p] / total,
            })
            .collect();
        (entries, false)
    } else {
        let entry = SupportEntry {
            position: 0,
            index: candidates.indices[0],
            theta: 1.0,
            weight: 1.0,
        };
        (vec![entry], true)
    };
    let positions: Vec<usize> = support.iter().map(|s| s.position).collect();
    let diameter = polytope_diameter(&slice.restrict(&positions));

    Ok(NnkNeighborhood {
        query_id: None,
        k_hat: support.len(),
        candidates,
        weights,
        support,
        diameter,
        fallback,
        slice,
    })
}
