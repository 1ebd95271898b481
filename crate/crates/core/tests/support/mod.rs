//! Independent reference implementations shared by integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nnk::{kernel_slice, solve_nnk, EmbeddingSet, KernelSpec};
use rand::Rng;
use rand_distr::StandardNormal;

/// Exact NNK solution by enumerating every support set.
///
/// For each subset `S`, solves `K_SS theta_S = K_Sq` by LU and keeps the
/// subsets whose solution is strictly positive and whose multipliers on the
/// complement are non-negative. Rank-deficient subsets are skipped. Among the
/// survivors (numerically there can be more than one near a boundary) the
/// one with the lowest objective wins.
pub fn enumerate_nnk(kss: &[Vec<f64>], ksq: &[f64]) -> Vec<f64> {
    let k = ksq.len();
    let full = DMatrix::from_fn(k, k, |i, j| kss[i][j]);
    let b = DVector::from_column_slice(ksq);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << k) {
        let s: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let theta = if s.is_empty() {
            vec![0.0; k]
        } else {
            let sub = DMatrix::from_fn(s.len(), s.len(), |i, j| full[(s[i], s[j])]);
            let sv = sub.clone().svd(false, false).singular_values;
            if sv.min() <= 1e-11 * sv.max().max(1.0) {
                continue;
            }
            let rhs = DVector::from_iterator(s.len(), s.iter().map(|&i| b[i]));
            let Some(z) = sub.lu().solve(&rhs) else { continue };
            if z.iter().any(|&v| v <= 0.0) {
                continue;
            }
            let mut theta = vec![0.0; k];
            for (&i, &v) in s.iter().zip(z.iter()) {
                theta[i] = v;
            }
            theta
        };
        let t = DVector::from_column_slice(&theta);
        let grad = &full * &t - &b;
        if (0..k).any(|i| theta[i] == 0.0 && grad[i] < -1e-9) {
            continue;
        }
        let obj = 1.0 - 2.0 * t.dot(&b) + t.dot(&(&full * &t));
        if best.as_ref().is_none_or(|(o, _)| obj < *o - 1e-15) {
            best = Some((obj, theta));
        }
    }
    best.expect("a convex QP over the orthant always has a KKT point").1
}

pub fn objective(kss: &[Vec<f64>], ksq: &[f64], theta: &[f64]) -> f64 {
    let k = ksq.len();
    let mut v = 1.0;
    for i in 0..k {
        v -= 2.0 * theta[i] * ksq[i];
        for j in 0..k {
            v += theta[i] * kss[i][j] * theta[j];
        }
    }
    v
}

/// Kernel value recomputed from the textbook formulas in f64.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    let na: f64 = a.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    ((1.0 + dot / (na * nb)) / 2.0).clamp(0.0, 1.0)
}

pub fn gaussian(a: &[f32], b: &[f32], sigma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

pub fn gaussian_rows<R: Rng>(rng: &mut R, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

pub fn to_f32(row: &[f64]) -> Vec<f32> {
    row.iter().map(|&v| v as f32).collect()
}

/// A random NNK problem: `k` candidates in `d` dimensions plus a query.
pub struct Instance {
    pub spec: KernelSpec,
    pub points: EmbeddingSet,
    pub query: Vec<f32>,
}

impl Instance {
    pub fn random<R: Rng>(rng: &mut R, max_dim: usize, max_k: usize) -> Self {
        let cosine = rng.random_bool(0.5);
        // One-dimensional cosine data only has two directions.
        let d = rng.random_range(if cosine { 2 } else { 1 }..=max_dim);
        let k = rng.random_range(1..=max_k);
        let spec = if cosine {
            KernelSpec::cosine()
        } else {
            KernelSpec::gaussian(rng.random_range(0.5..2.0)).unwrap()
        };
        let points = EmbeddingSet::from_rows(&gaussian_rows(rng, k, d)).unwrap();
        let query = to_f32(&gaussian_rows(rng, 1, d)[0]);
        Self {
            spec,
            points,
            query,
        }
    }

    pub fn kernel(&self, a: &[f32], b: &[f32]) -> f64 {
        match self.spec.kind {
            nnk::KernelKind::Cosine => cosine(a, b),
            nnk::KernelKind::Gaussian => gaussian(a, b, self.spec.sigma),
        }
    }

    /// `(K_SS, K_Sq)` from the reference formulas.
    pub fn matrices(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let k = self.points.len();
        let kss = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { 1.0 } else { self.kernel(self.points.row(i), self.points.row(j)) })
                    .collect()
            })
            .collect();
        let ksq = (0..k).map(|i| self.kernel(self.points.row(i), &self.query)).collect();
        (kss, ksq)
    }

    /// Solves with the library and with [`enumerate_nnk`]; `Err` describes a
    /// mismatch in support or a weight difference above 1e-6.
    pub fn check_against_oracle(&self, tol: f64) -> Result<(), String> {
        let all: Vec<usize> = (0..self.points.len()).collect();
        let slice = kernel_slice(&self.spec, &self.points, &all, &self.query).map_err(|e| e.to_string())?;
        let got = solve_nnk(&slice, tol).map_err(|e| e.to_string())?;
        let (kss, ksq) = self.matrices();
        let want = enumerate_nnk(&kss, &ksq);
        let want_support: Vec<usize> = (0..want.len()).filter(|&i| want[i] > tol).collect();
        if got.support != want_support {
            return Err(format!("support {:?} vs oracle {:?} ({want:?})", got.support, want_support));
        }
        let worst = got
            .theta
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if worst > 1e-6 {
            return Err(format!("max |dtheta| = {worst:e}: {:?} vs {want:?}", got.theta));
        }
        Ok(())
    }
}

type Big = dashu_float::FBig;

fn big(x: f64) -> Big {
    Big::try_from(x).unwrap().with_precision(256).value()
}

/// `(value, ln value)` of `2 e^{-N eps^2/18} + 6 e^{-N eps^3/(108 k (2 + gamma))}`
/// evaluated in 256-bit binary floating point.
pub fn bound_oracle(n: u64, epsilon: f64, mean_k_hat: f64, gamma: f64) -> (f64, f64) {
    let (n, e) = (big(n as f64), big(epsilon));
    let first = (-(n.clone() * e.clone() * e.clone() / big(18.0))).exp();
    let denom = big(108.0) * big(mean_k_hat) * (big(2.0) + big(gamma));
    let second = (-(n * e.clone() * e.clone() * e / denom)).exp();
    let total = big(2.0) * first + big(6.0) * second;
    (total.to_f64().value(), total.ln().to_f64().value())
}
