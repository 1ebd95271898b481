use rayon::prelude::*;
use serde::Serialize;

use super::histogram::{Histogram, DEFAULT_BINS};
use crate::data::EmbeddingSet;
use crate::error::{NnkError, Result};
use crate::kernel::KernelSpec;
use crate::nnk_core::neighborhood_unchecked;

/// Distribution of NNK support sizes over a query set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusSummary {
    pub name: String,
    pub num_queries: usize,
    pub mean_k_hat: f64,
    pub fallback_count: usize,
    pub k_hat_histogram: Histogram,
}

/// Several censuses side by side; names the set with the fewest neighbors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusComparison {
    pub sets: Vec<CensusSummary>,
    pub lowest_mean_k_hat: String,
}

pub fn neighbor_census(
    spec: &KernelSpec,
    train: &EmbeddingSet,
    queries: &EmbeddingSet,
    k: usize,
    tol: f64,
) -> Result<CensusSummary> {
    if queries.is_empty() {
        return Err(NnkError::invalid("census needs at least one query"));
    }
    if queries.dim() != train.dim() {
        return Err(NnkError::Dimension {
            expected: train.dim(),
            actual: queries.dim(),
        });
    }
    spec.check_points(train)?;
    spec.check_points(queries)?;
    let outcomes: Vec<(usize, bool)> = (0..queries.len())
        .into_par_iter()
        .map(|i| {
            neighborhood_unchecked(spec, train, queries.row(i), queries.row_norm(i), k, tol, &[])
                .map(|n| (n.k_hat, n.fallback))
        })
        .collect::<Result<_>>()?;
    Ok(summarize(String::new(), &outcomes))
}

pub(crate) fn summarize(name: String, outcomes: &[(usize, bool)]) -> CensusSummary {
    let k_hats: Vec<f64> = outcomes.iter().map(|o| o.0 as f64).collect();
    CensusSummary {
        name,
        num_queries: outcomes.len(),
        mean_k_hat: k_hats.iter().sum::<f64>() / k_hats.len() as f64,
        fallback_count: outcomes.iter().filter(|o| o.1).count(),
        k_hat_histogram: Histogram::uniform(&k_hats, DEFAULT_BINS),
    }
}

/// Ties go to the earliest set.
pub fn compare_census(sets: Vec<CensusSummary>) -> Result<CensusComparison> {
    let lowest = sets
        .iter()
        .reduce(|best, s| if s.mean_k_hat < best.mean_k_hat { s } else { best })
        .ok_or_else(|| NnkError::invalid("no census sets to compare"))?
        .name
        .clone();
    Ok(CensusComparison {
        sets,
        lowest_mean_k_hat: lowest,
    })
}
