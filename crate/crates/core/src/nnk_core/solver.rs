//! Active-set solver for
//!
//! ```text
//! min_{theta >= 0}  1 - 2 theta' K_Sq + theta' K_SS theta
//! ```
//!
//! The iteration is Lawson–Hanson pivoting on the partition `{P, P̄}`:
//! grow the passive set `P` with the most violated multiplier, solve
//! `K_PP theta_P = K_P*` exactly, and step back along the segment toward the
//! new solution whenever it leaves the feasible orthant. At termination
//! `theta_P` solves the equality system and every inactive multiplier
//! `(K_SS theta - K_Sq)_j` is non-negative up to [`MULTIPLIER_EPS`].
//!
//! Coordinates below the caller's `tol` are then clamped to zero and the
//! system re-solved on the surviving support, so stationarity holds exactly
//! on the reported support.

use serde::Serialize;

use crate::error::{NnkError, Result};
use crate::kernel::KernelSlice;

/// Default zero threshold for weights, relative to unit-ranged kernels.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Smallest admissible Cholesky pivot on `K_PP`.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// A candidate enters `P` only when its multiplier exceeds this.
const MULTIPLIER_EPS: f64 = 1e-12;

/// Two candidates whose similarity is within this of 1 are kernel duplicates.
pub const DUPLICATE_EPS: f64 = 1e-12;

/// Raw solution of the non-negative kernel regression program.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NnkWeights {
    /// One entry per candidate; exactly zero off the support.
    pub theta: Vec<f64>,
    /// Candidate positions with `theta > 0`, ascending.
    pub support: Vec<usize>,
    /// `1 - 2 theta' K_Sq + theta' K_SS theta` at `theta`.
    pub objective_value: f64,
}

impl NnkWeights {
    pub fn k_hat(&self) -> usize {
        self.support.len()
    }

    pub fn weight_sum(&self) -> f64 {
        self.support.iter().map(|&i| self.theta[i]).sum()
    }
}

pub fn objective(slice: &KernelSlice, theta: &[f64]) -> f64 {
    let k = slice.len();
    let mut quad = 0.0;
    let mut lin = 0.0;
    for i in 0..k {
        if theta[i] == 0.0 {
            continue;
        }
        lin += theta[i] * slice.ksq()[i];
        let row: f64 = (0..k).map(|j| slice.kss(i, j) * theta[j]).sum();
        quad += theta[i] * row;
    }
    1.0 - 2.0 * lin + quad
}

/// `(K_SS theta - K_Sq)_i` for every `i`.
pub fn gradient(slice: &KernelSlice, theta: &[f64]) -> Vec<f64> {
    let k = slice.len();
    (0..k)
        .map(|i| (0..k).map(|j| slice.kss(i, j) * theta[j]).sum::<f64>() - slice.ksq()[i])
        .collect()
}

/// Solves `K_PP z = K_P*` by Cholesky; `None` when a pivot drops below
/// [`PIVOT_FLOOR`].
fn solve_passive(slice: &KernelSlice, passive: &[usize]) -> Option<Vec<f64>> {
    let m = passive.len();
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut acc = slice.kss(passive[i], passive[j]);
            for p in 0..j {
                acc -= l[i * m + p] * l[j * m + p];
            }
            if i == j {
                if acc < PIVOT_FLOOR {
                    return None;
                }
                l[i * m + i] = acc.sqrt();
            } else {
                l[i * m + j] = acc / l[j * m + j];
            }
        }
    }
    let mut y: Vec<f64> = passive.iter().map(|&i| slice.ksq()[i]).collect();
    for i in 0..m {
        for p in 0..i {
            y[i] -= l[i * m + p] * y[p];
        }
        y[i] /= l[i * m + i];
    }
    for i in (0..m).rev() {
        for p in i + 1..m {
            y[i] -= l[p * m + i] * y[p];
        }
        y[i] /= l[i * m + i];
    }
    Some(y)
}

pub fn solve_nnk(slice: &KernelSlice, tol: f64) -> Result<NnkWeights> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(NnkError::invalid(format!("tol must be positive, got {tol}")));
    }
    let k = slice.len();
    let mut theta = vec![0.0; k];
    let mut passive: Vec<usize> = Vec::with_capacity(k);
    let mut in_passive = vec![false; k];
    // Candidates whose admission failed numerically (singular pivot or a
    // non-positive entering weight); they stay out for the rest of the solve.
    let mut blocked = vec![false; k];

    for _ in 0..(3 * k + 10) {
        let grad = gradient(slice, &theta);
        let entering = (0..k)
            .filter(|&j| !in_passive[j] && !blocked[j] && -grad[j] > MULTIPLIER_EPS)
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if -grad[b] >= -grad[j] => Some(b),
                _ => Some(j),
            });
        let Some(j) = entering else { break };

        if let Some(&m) = passive
            .iter()
            .find(|&&m| slice.kss(j, m) >= 1.0 - DUPLICATE_EPS)
        {
            return Err(NnkError::Degenerate {
                first: m.min(j),
                second: m.max(j),
            });
        }

        passive.push(j);
        in_passive[j] = true;
        let mut first_pass = true;
        loop {
            let z = match solve_passive(slice, &passive) {
                Some(z) => z,
                None => {
                    // Dropping coordinates from a factorizable K_PP cannot make
                    // it singular, so only the entering column can be at fault.
                    let last = passive.pop().expect("passive set is non-empty");
                    in_passive[last] = false;
                    theta[last] = 0.0;
                    blocked[last] = true;
                    break;
                }
            };
            if z.iter().all(|&v| v > 0.0) {
                for (&i, &v) in passive.iter().zip(&z) {
                    theta[i] = v;
                }
                break;
            }
            if first_pass && *z.last().expect("non-empty") <= 0.0 {
                passive.pop();
                in_passive[j] = false;
                blocked[j] = true;
                break;
            }
            first_pass = false;

            let (blocking, alpha) = passive
                .iter()
                .zip(&z)
                .filter(|(_, &zi)| zi <= 0.0)
                .map(|(&i, &zi)| (i, theta[i] / (theta[i] - zi)))
                .fold((usize::MAX, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
            for (&i, &zi) in passive.iter().zip(&z) {
                theta[i] += alpha * (zi - theta[i]);
            }
            // Rounding can leave the blocking coordinate a hair above zero.
            if blocking != usize::MAX {
                theta[blocking] = 0.0;
            }
            passive.retain(|&i| {
                let keep = theta[i] > 0.0;
                if !keep {
                    theta[i] = 0.0;
                    in_passive[i] = false;
                }
                keep
            });
            if passive.is_empty() {
                break;
            }
        }
    }

    clamp_small(slice, &mut theta, &mut passive, tol);

    let mut support: Vec<usize> = (0..k).filter(|&i| theta[i] > 0.0).collect();
    support.sort_unstable();
    let objective_value = objective(slice, &theta);
    Ok(NnkWeights {
        theta,
        support,
        objective_value,
    })
}

/// Zeroes the smallest coordinate below `tol` and re-solves on the
/// survivors, one coordinate at a time, until every survivor is at least `tol`.
/// Removing a single coordinate of size below `tol` moves its own multiplier
/// by less than `tol`, which a batch clamp does not guarantee.
fn clamp_small(slice: &KernelSlice, theta: &mut [f64], passive: &mut Vec<usize>, tol: f64) {
    while let Some(at) = passive
        .iter()
        .enumerate()
        .filter(|(_, &i)| theta[i] < tol)
        .min_by(|a, b| theta[*a.1].total_cmp(&theta[*b.1]))
        .map(|(at, _)| at)
    {
        theta[passive.remove(at)] = 0.0;
        if passive.is_empty() {
            return;
        }
        match solve_passive(slice, passive) {
            Some(z) => {
                for (&i, &v) in passive.iter().zip(&z) {
                    theta[i] = v;
                }
            }
            None => return,
        }
    }
}

/// KKT diagnostics for a candidate solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KktResidual {
    /// `max |(K_SS theta - K_Sq)_i|` over the support (0 when empty).
    pub stationarity: f64,
    /// `min (K_SS theta - K_Sq)_j` over zero entries (`+inf` when none).
    pub min_slack: f64,
}

impl KktResidual {
    pub fn is_optimal(&self, tol: f64) -> bool {
        self.stationarity <= tol && self.min_slack >= -tol
    }
}

pub fn kkt_residual(slice: &KernelSlice, theta: &[f64]) -> Result<KktResidual> {
    if theta.len() != slice.len() {
        return Err(NnkError::Dimension {
            expected: slice.len(),
            actual: theta.len(),
        });
    }
    let grad = gradient(slice, theta);
    let mut stationarity: f64 = 0.0;
    let mut min_slack = f64::INFINITY;
    for (g, &t) in grad.iter().zip(theta) {
        if t > 0.0 {
            stationarity = stationarity.max(g.abs());
        } else {
            min_slack = min_slack.min(*g);
        }
    }
    Ok(KktResidual {
        stationarity,
        min_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slice(kss: Vec<Vec<f64>>, ksq: Vec<f64>) -> KernelSlice {
        KernelSlice::new(kss, ksq).unwrap()
    }

    #[test]
    fn single_self_similar_candidate() {
        let w = solve_nnk(&slice(vec![vec![1.0]], vec![1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(w.theta, vec![1.0]);
        assert_eq!(w.support, vec![0]);
        assert!(w.objective_value.abs() < 1e-15);
    }

    #[test]
    fn identity_system() {
        let s = slice(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.8, 0.6]);
        let w = solve_nnk(&s, DEFAULT_TOL).unwrap();
        assert!((w.theta[0] - 0.8).abs() < 1e-15);
        assert!((w.theta[1] - 0.6).abs() < 1e-15);
        assert_eq!(w.support, vec![0, 1]);
    }

    #[test]
    fn correlated_candidate_is_pruned() {
        let s = slice(vec![vec![1.0, 0.9], vec![0.9, 1.0]], vec![0.8, 0.6]);
        let w = solve_nnk(&s, DEFAULT_TOL).unwrap();
        assert!((w.theta[0] - 0.8).abs() < 1e-15);
        assert_eq!(w.theta[1], 0.0);
        assert_eq!(w.support, vec![0]);
        let r = kkt_residual(&s, &w.theta).unwrap();
        assert!((r.min_slack - 0.12).abs() < 1e-12);
        assert!(r.stationarity < 1e-15);
    }

    #[test]
    fn all_tiny_similarities_give_empty_support() {
        let s = slice(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1e-8, 1e-9]);
        let w = solve_nnk(&s, DEFAULT_TOL).unwrap();
        assert!(w.support.is_empty());
        assert_eq!(w.theta, vec![0.0, 0.0]);
        assert!(kkt_residual(&s, &w.theta).unwrap().is_optimal(DEFAULT_TOL));
    }

    #[test]
    fn duplicate_columns_never_share_support() {
        let s = slice(
            vec![vec![1.0, 1.0, 0.2], vec![1.0, 1.0, 0.2], vec![0.2, 0.2, 1.0]],
            vec![0.9, 0.9, 0.5],
        );
        let w = solve_nnk(&s, DEFAULT_TOL).unwrap();
        assert_eq!(w.support, vec![0, 2]);
        assert!((w.theta[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!(kkt_residual(&s, &w.theta).unwrap().is_optimal(DEFAULT_TOL));
    }

    #[test]
    fn rejects_bad_tol() {
        let s = slice(vec![vec![1.0]], vec![1.0]);
        assert!(solve_nnk(&s, 0.0).is_err());
        assert!(solve_nnk(&s, f64::NAN).is_err());
    }

    #[test]
    fn kkt_of_zero_vector() {
        let s = slice(vec![vec![1.0, 0.9], vec![0.9, 1.0]], vec![0.8, 0.6]);
        let r = kkt_residual(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(r.stationarity, 0.0);
        assert!((r.min_slack + 0.8).abs() < 1e-15);
        assert!(!r.is_optimal(DEFAULT_TOL));
    }

    #[test]
    fn kkt_detects_perturbation() {
        let s = slice(vec![vec![1.0, 0.3], vec![0.3, 1.0]], vec![0.8, 0.6]);
        let mut w = solve_nnk(&s, DEFAULT_TOL).unwrap();
        assert_eq!(w.support, vec![0, 1]);
        w.theta[0] += 0.1;
        let r = kkt_residual(&s, &w.theta).unwrap();
        // (K theta - b)_0 moves by K_00 * 0.1.
        assert!((r.stationarity - 0.1).abs() < 1e-12);
        assert!(kkt_residual(&s, &[1.0]).is_err());
    }
}
