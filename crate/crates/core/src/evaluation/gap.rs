use std::collections::HashMap;

use serde::Serialize;

use super::loo::LooReport;
use crate::error::{NnkError, Result};

/// Zero-one error of an external model next to the leave-one-out NNK error.
///
/// A positive `gap` (NNK worse than the model on its own training data) hints
/// at overfitting, a negative one at underfitting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelGap {
    pub xi_model: f64,
    pub xi_nnk: f64,
    pub gap: f64,
}

pub fn model_gap(report: &LooReport, predictions: &HashMap<u64, u32>) -> Result<ModelGap> {
    if report.records.is_empty() {
        return Err(NnkError::invalid("report has no records"));
    }
    let mut model_wrong = 0usize;
    for r in &report.records {
        let predicted = predictions
            .get(&r.point_id)
            .ok_or(NnkError::MissingPrediction(r.point_id))?;
        model_wrong += usize::from(*predicted != r.label);
    }
    let xi_model = model_wrong as f64 / report.records.len() as f64;
    let xi_nnk = report.zero_one_risk();
    Ok(ModelGap {
        xi_model,
        xi_nnk,
        gap: xi_nnk - xi_model,
    })
}
