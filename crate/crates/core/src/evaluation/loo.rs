//! Leave-one-out evaluation over a labelled dataset.
//!
//! Each point is estimated from all other points; the per-point work is
//! data-parallel and results are gathered by index, so reports do not depend
//! on the number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use super::histogram::{Histogram, DEFAULT_BINS};
use super::spread::interpolation_spread;
use crate::config::EvalConfig;
use crate::data::LabeledDataset;
use crate::error::{NnkError, Result};
use crate::estimators::{
    loss, plug_in_classify, unbiased_estimate, winn_from_candidates, EstimateMethod,
    InterpolationEstimate, Method,
};
use crate::kernel::slice_unchecked;
use crate::neighbors::knn_unchecked;
use crate::nnk_core::{neighborhood_unchecked, polytope_diameter};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LooRecord {
    pub point_id: u64,
    pub label: u32,
    pub estimate: InterpolationEstimate,
    pub predicted: u32,
    pub loss: f64,
    pub k_hat: usize,
    pub diameter: f64,
    /// Mean squared distance between this point's estimate and those of its
    /// interpolating neighbors.
    pub spread: f64,
    /// Two-class spread on the scalar `probs[1]` scale (half of `spread`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread_scalar: Option<f64>,
    pub fallback_used: bool,
    /// Ids of the interpolating neighbors; never contains `point_id`.
    pub support_ids: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LooReport {
    pub config: EvalConfig,
    pub num_points: usize,
    pub num_classes: u32,
    pub loo_risk: f64,
    pub mean_k_hat: f64,
    pub mean_diameter: f64,
    pub mean_spread: f64,
    pub fallback_count: usize,
    pub spread_histogram: Histogram,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread_scalar_histogram: Option<Histogram>,
    pub k_hat_histogram: Histogram,
    pub records: Vec<LooRecord>,
}

impl LooReport {
    /// Share of records whose plug-in decision differs from the label.
    pub fn zero_one_risk(&self) -> f64 {
        let wrong = self.records.iter().filter(|r| r.predicted != r.label).count();
        wrong as f64 / self.records.len() as f64
    }
}

pub(crate) struct PointOutcome {
    pub(crate) estimate: InterpolationEstimate,
    pub(crate) support: Vec<usize>,
    pub(crate) k_hat: usize,
    pub(crate) diameter: f64,
    pub(crate) fallback: bool,
    pub(crate) error: Option<String>,
}

/// Estimate of one query against `dataset` with the given exclusions.
///
/// Solver failures degrade to a flagged 1-NN estimate; only a failure to find
/// any candidate at all is returned as an error.
pub(crate) fn estimate_point(
    dataset: &LabeledDataset,
    config: &EvalConfig,
    query: &[f32],
    query_norm: f64,
    exclude: &[usize],
) -> Result<PointOutcome> {
    let points = dataset.points();
    let spec = &config.kernel;
    match config.method {
        Method::Nnk => {
            match neighborhood_unchecked(spec, points, query, query_norm, config.k, config.tol, exclude)
            {
                Ok(n) => Ok(PointOutcome {
                    estimate: unbiased_estimate(&n, dataset)?,
                    support: n.support_indices().collect(),
                    k_hat: n.k_hat,
                    diameter: n.diameter,
                    fallback: n.fallback,
                    error: None,
                }),
                Err(NnkError::EmptyCandidates) => Err(NnkError::EmptyCandidates),
                Err(e) => {
                    let nearest = knn_unchecked(spec, points, query, query_norm, 1, exclude)?;
                    let index = nearest.indices[0];
                    let mut probs = vec![0.0; dataset.num_classes() as usize];
                    probs[dataset.label(index) as usize] = 1.0;
                    Ok(PointOutcome {
                        estimate: InterpolationEstimate {
                            probs,
                            method: EstimateMethod::NnkUnbiased,
                            k_hat: 1,
                            fallback: true,
                        },
                        support: vec![index],
                        k_hat: 1,
                        diameter: 0.0,
                        fallback: true,
                        error: Some(e.to_string()),
                    })
                }
            }
        }
        Method::Winn => {
            let candidates = knn_unchecked(spec, points, query, query_norm, config.k, exclude)?;
            let estimate = winn_from_candidates(&candidates, dataset)?;
            let slice = slice_unchecked(spec, points, &candidates.indices, query, query_norm);
            Ok(PointOutcome {
                fallback: estimate.fallback,
                k_hat: candidates.len(),
                diameter: polytope_diameter(&slice),
                support: candidates.indices,
                estimate,
                error: None,
            })
        }
    }
}

pub fn loo_evaluate(dataset: &LabeledDataset, config: &EvalConfig) -> Result<LooReport> {
    config.validate()?;
    let n = dataset.len();
    if n < 2 {
        return Err(NnkError::invalid("leave-one-out needs at least 2 points"));
    }
    if config.k >= n {
        return Err(NnkError::invalid(format!(
            "k = {} must be smaller than the dataset size {n}",
            config.k
        )));
    }
    let points = dataset.points();
    config.kernel.check_points(points)?;

    let outcomes: Vec<PointOutcome> = (0..n)
        .into_par_iter()
        .map(|i| estimate_point(dataset, config, points.row(i), points.row_norm(i), &[i]))
        .collect::<Result<_>>()?;

    let two_class = dataset.num_classes() == 2;
    let mut records = Vec::with_capacity(n);
    for (i, o) in outcomes.iter().enumerate() {
        debug_assert!(!o.support.contains(&i), "point {i} appears in its own LOO support");
        let neighbor_probs: Vec<&[f64]> = o
            .support
            .iter()
            .map(|&j| outcomes[j].estimate.probs.as_slice())
            .collect();
        let spread = interpolation_spread(&o.estimate.probs, &neighbor_probs)?;
        let label = dataset.label(i);
        records.push(LooRecord {
            point_id: dataset.id(i),
            label,
            predicted: plug_in_classify(&o.estimate),
            loss: loss(&o.estimate, label, config.loss)?,
            k_hat: o.k_hat,
            diameter: o.diameter,
            spread,
            spread_scalar: two_class.then_some(spread / 2.0),
            fallback_used: o.fallback,
            support_ids: o.support.iter().map(|&j| dataset.id(j)).collect(),
            error: o.error.clone(),
            estimate: o.estimate.clone(),
        });
    }

    let mean = |f: &dyn Fn(&LooRecord) -> f64| records.iter().map(f).sum::<f64>() / n as f64;
    let spreads: Vec<f64> = records.iter().map(|r| r.spread).collect();
    let k_hats: Vec<f64> = records.iter().map(|r| r.k_hat as f64).collect();
    Ok(LooReport {
        config: config.clone(),
        num_points: n,
        num_classes: dataset.num_classes(),
        loo_risk: mean(&|r| r.loss),
        mean_k_hat: mean(&|r| r.k_hat as f64),
        mean_diameter: mean(&|r| r.diameter),
        mean_spread: mean(&|r| r.spread),
        fallback_count: records.iter().filter(|r| r.fallback_used).count(),
        spread_histogram: Histogram::uniform(&spreads, DEFAULT_BINS),
        spread_scalar_histogram: two_class.then(|| {
            let scalar: Vec<f64> = spreads.iter().map(|s| s / 2.0).collect();
            Histogram::uniform(&scalar, DEFAULT_BINS)
        }),
        k_hat_histogram: Histogram::uniform(&k_hats, DEFAULT_BINS),
        records,
    })
}

/// Mean loss of `holdout` points estimated against `train`, without exclusion.
pub fn holdout_risk(
    train: &LabeledDataset,
    holdout: &LabeledDataset,
    config: &EvalConfig,
) -> Result<f64> {
    config.validate()?;
    if holdout.dim() != train.dim() {
        return Err(NnkError::Dimension {
            expected: train.dim(),
            actual: holdout.dim(),
        });
    }
    if holdout.num_classes() > train.num_classes() {
        if let Some(row) = holdout.labels().iter().position(|&l| l >= train.num_classes()) {
            return Err(NnkError::LabelOutOfRange {
                row,
                label: holdout.label(row),
                num_classes: train.num_classes(),
            });
        }
    }
    config.kernel.check_points(train.points())?;
    config.kernel.check_points(holdout.points())?;
    let q = holdout.points();
    let losses: Vec<f64> = (0..holdout.len())
        .into_par_iter()
        .map(|i| {
            let o = estimate_point(train, config, q.row(i), q.row_norm(i), &[])?;
            loss(&o.estimate, holdout.label(i), config.loss)
        })
        .collect::<Result<_>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}
