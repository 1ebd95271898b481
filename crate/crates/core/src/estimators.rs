//! Label estimates from neighborhoods, class decisions and losses.
//!
//! Estimates are probability vectors over `C` classes built as combinations
//! of one-hot labels. For two classes `probs[1]` is the scalar conditional
//! estimate.

use serde::{Deserialize, Serialize};

use crate::data::{norm, LabeledDataset};
use crate::error::{NnkError, Result};
use crate::kernel::KernelSpec;
use crate::neighbors::{knn_unchecked, NeighborList};
use crate::nnk_core::NnkNeighborhood;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    NnkBiased,
    NnkUnbiased,
    Winn,
}

/// Estimator used by evaluation commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Normalized NNK polytope interpolation.
    Nnk,
    /// Similarity-weighted interpolation over all k candidates.
    Winn,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Nnk => "nnk",
            Method::Winn => "winn",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = NnkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nnk" => Ok(Method::Nnk),
            "winn" => Ok(Method::Winn),
            other => Err(NnkError::invalid(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    ZeroOne,
    Squared,
}

impl std::str::FromStr for LossKind {
    type Err = NnkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_one" => Ok(LossKind::ZeroOne),
            "squared" => Ok(LossKind::Squared),
            other => Err(NnkError::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationEstimate {
    pub probs: Vec<f64>,
    pub method: EstimateMethod,
    pub k_hat: usize,
    /// Set when the estimate came from a degenerate-weight fallback.
    pub fallback: bool,
}

fn accumulate(
    dataset: &LabeledDataset,
    terms: impl IntoIterator<Item = (usize, f64)>,
) -> Vec<f64> {
    let mut probs = vec![0.0; dataset.num_classes() as usize];
    for (index, coefficient) in terms {
        probs[dataset.label(index) as usize] += coefficient;
    }
    probs
}

/// `sum_i theta_i * onehot(y_i)` over the support, with raw weights.
pub fn biased_estimate(
    neighborhood: &NnkNeighborhood,
    dataset: &LabeledDataset,
) -> Result<InterpolationEstimate> {
    if neighborhood.support.is_empty() {
        return Err(NnkError::invalid("neighborhood has an empty support"));
    }
    Ok(InterpolationEstimate {
        probs: accumulate(dataset, neighborhood.support.iter().map(|s| (s.index, s.theta))),
        method: EstimateMethod::NnkBiased,
        k_hat: neighborhood.k_hat,
        fallback: neighborhood.fallback,
    })
}

/// `sum_i (theta_i / sum_j theta_j) * onehot(y_i)`; sums to one.
pub fn unbiased_estimate(
    neighborhood: &NnkNeighborhood,
    dataset: &LabeledDataset,
) -> Result<InterpolationEstimate> {
    let total: f64 = neighborhood.support.iter().map(|s| s.theta).sum();
    if neighborhood.support.is_empty() || total <= 0.0 {
        return Err(NnkError::invalid("neighborhood has no positive weight"));
    }
    Ok(InterpolationEstimate {
        probs: accumulate(
            dataset,
            neighborhood.support.iter().map(|s| (s.index, s.theta / total)),
        ),
        method: EstimateMethod::NnkUnbiased,
        k_hat: neighborhood.k_hat,
        fallback: neighborhood.fallback,
    })
}

/// Argmax with ties to the lowest class, so a two-class estimate of exactly
/// one half decides for class 0.
pub fn plug_in_classify(estimate: &InterpolationEstimate) -> u32 {
    let mut best = 0;
    for (c, &p) in estimate.probs.iter().enumerate().skip(1) {
        if p > estimate.probs[best] {
            best = c;
        }
    }
    best as u32
}

/// Similarity-weighted estimate over an existing candidate list.
pub fn winn_from_candidates(
    candidates: &NeighborList,
    dataset: &LabeledDataset,
) -> Result<InterpolationEstimate> {
    if candidates.is_empty() {
        return Err(NnkError::EmptyCandidates);
    }
    let total: f64 = candidates.similarities.iter().sum();
    let (probs, fallback) = if total > 0.0 {
        let terms = candidates
            .indices
            .iter()
            .zip(&candidates.similarities)
            .map(|(&i, &s)| (i, s / total));
        (accumulate(dataset, terms), false)
    } else {
        let uniform = 1.0 / candidates.len() as f64;
        let terms = candidates.indices.iter().map(|&i| (i, uniform));
        (accumulate(dataset, terms), true)
    };
    Ok(InterpolationEstimate {
        probs,
        method: EstimateMethod::Winn,
        k_hat: candidates.len(),
        fallback,
    })
}

pub fn winn_estimate(
    spec: &KernelSpec,
    dataset: &LabeledDataset,
    query: &[f32],
    k: usize,
    exclude: &[usize],
) -> Result<InterpolationEstimate> {
    let points = dataset.points();
    spec.check_points(points)?;
    if query.len() != points.dim() {
        return Err(NnkError::Dimension {
            expected: points.dim(),
            actual: query.len(),
        });
    }
    let qn = norm(query);
    spec.check_norm(qn, usize::MAX)
        .map_err(|_| NnkError::invalid("query has zero norm"))?;
    let candidates = knn_unchecked(spec, points, query, qn, k, exclude)?;
    winn_from_candidates(&candidates, dataset)
}

pub fn loss(estimate: &InterpolationEstimate, true_label: u32, kind: LossKind) -> Result<f64> {
    let c = estimate.probs.len();
    if true_label as usize >= c {
        return Err(NnkError::ClassOutOfRange {
            label: true_label,
            num_classes: c as u32,
        });
    }
    Ok(match kind {
        LossKind::ZeroOne => f64::from(u8::from(plug_in_classify(estimate) != true_label)),
        LossKind::Squared => estimate
            .probs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let target = if i == true_label as usize { 1.0 } else { 0.0 };
                (p - target) * (p - target)
            })
            .sum(),
    })
}
