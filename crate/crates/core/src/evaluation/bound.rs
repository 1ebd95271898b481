use serde::Serialize;

use crate::error::{NnkError, Result};

/// Tail bound on the deviation between leave-one-out and generalization risk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConcentrationBound {
    pub value: f64,
    /// Natural log of `value`, finite even where `value` underflows.
    pub ln_value: f64,
    /// The bound exceeds 1 and says nothing.
    pub vacuous: bool,
}

/// `2 exp(-N eps^2 / 18) + 6 exp(-N eps^3 / (108 E[k_hat] (2 + gamma)))`
///
/// `gamma` is the largest number of distinct points that can share a nearest
/// neighbor; it is not estimable from data and must be supplied.
pub fn loo_concentration_bound(
    n: u64,
    epsilon: f64,
    mean_k_hat: f64,
    gamma: f64,
) -> Result<ConcentrationBound> {
    if n == 0 {
        return Err(NnkError::invalid("N must be positive"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(NnkError::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(mean_k_hat >= 1.0 && mean_k_hat.is_finite()) {
        return Err(NnkError::invalid(format!("mean k_hat must be >= 1, got {mean_k_hat}")));
    }
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(NnkError::invalid(format!("gamma must be >= 1, got {gamma}")));
    }
    let n = n as f64;
    let first = n * epsilon * epsilon / 18.0;
    let second = n * epsilon * epsilon * epsilon / (108.0 * mean_k_hat * (2.0 + gamma));
    let value = 2.0 * (-first).exp() + 6.0 * (-second).exp();

    let a = 2f64.ln() - first;
    let b = 6f64.ln() - second;
    let hi = a.max(b);
    let ln_value = hi + ((a - hi).exp() + (b - hi).exp()).ln();

    Ok(ConcentrationBound {
        value,
        ln_value,
        vacuous: value > 1.0,
    })
}
