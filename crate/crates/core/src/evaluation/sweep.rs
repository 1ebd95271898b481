use std::fmt::Write as _;

use serde::Serialize;

use super::loo::{holdout_risk, loo_evaluate};
use crate::config::EvalConfig;
use crate::data::LabeledDataset;
use crate::error::{NnkError, Result};
use crate::estimators::Method;

#[derive(Clone, Copy, Debug)]
pub enum EvalMode<'a> {
    /// Leave-one-out risk on the training set.
    Loo,
    /// Risk on a separate labelled set, estimated without exclusion.
    Holdout(&'a LabeledDataset),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub method: Method,
    pub risk: f64,
}

/// Risk for every `(k, method)` pair, in grid order then method order.
pub fn sweep_compare(
    train: &LabeledDataset,
    mode: EvalMode<'_>,
    k_grid: &[usize],
    methods: &[Method],
    base: &EvalConfig,
) -> Result<Vec<SweepRow>> {
    if k_grid.is_empty() {
        return Err(NnkError::invalid("k grid is empty"));
    }
    if methods.is_empty() {
        return Err(NnkError::invalid("no methods to compare"));
    }
    let mut rows = Vec::with_capacity(k_grid.len() * methods.len());
    for &k in k_grid {
        for &method in methods {
            let config = EvalConfig {
                k,
                method,
                ..base.clone()
            };
            let risk = match mode {
                EvalMode::Loo => loo_evaluate(train, &config)?.loo_risk,
                EvalMode::Holdout(holdout) => {
                    if k > train.len() {
                        return Err(NnkError::invalid(format!(
                            "k = {k} exceeds the training size {}",
                            train.len()
                        )));
                    }
                    holdout_risk(train, holdout, &config)?
                }
            };
            rows.push(SweepRow { k, method, risk });
        }
    }
    Ok(rows)
}

/// `k,method,risk` table.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("k,method,risk\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.k, r.method, r.risk);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::EmbeddingSet;

    fn ring(n: usize) -> LabeledDataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let t = i as f64 * 0.61;
                vec![t.cos(), t.sin(), 0.2 * (i % 3) as f64]
            })
            .collect();
        let labels = (0..n).map(|i| u32::from(((i as f64) * 0.61).cos() > 0.0)).collect();
        LabeledDataset::new(EmbeddingSet::from_rows(&rows).unwrap(), labels, 2).unwrap()
    }

    #[test]
    fn k_one_methods_agree() {
        let d = ring(40);
        let rows = sweep_compare(&d, EvalMode::Loo, &[1], &[Method::Nnk, Method::Winn], &EvalConfig::default())
            .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].risk, rows[1].risk);
    }

    #[test]
    fn self_holdout_is_perfect_for_nnk() {
        let d = ring(40);
        let rows = sweep_compare(&d, EvalMode::Holdout(&d), &[5, 10], &[Method::Nnk], &EvalConfig::default())
            .unwrap();
        assert!(rows.iter().all(|r| r.risk == 0.0));
    }

    #[test]
    fn csv_layout_and_errors() {
        let rows = vec![SweepRow {
            k: 5,
            method: Method::Winn,
            risk: 0.25,
        }];
        assert_eq!(sweep_csv(&rows), "k,method,risk\n5,winn,0.25\n");
        let d = ring(10);
        assert!(sweep_compare(&d, EvalMode::Loo, &[], &[Method::Nnk], &EvalConfig::default()).is_err());
        assert!(sweep_compare(&d, EvalMode::Loo, &[10], &[Method::Nnk], &EvalConfig::default()).is_err());
    }
}
