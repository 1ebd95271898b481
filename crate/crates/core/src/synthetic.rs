//! Seeded synthetic embeddings for experiments and tests.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{EmbeddingSet, LabeledDataset};
use crate::error::{NnkError, Result};

/// Equal-weight mixture of gaussians sharing one diagonal covariance; each
/// component carries a class label.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMixture {
    pub centers: Vec<Vec<f64>>,
    pub center_labels: Vec<u32>,
    /// Per-coordinate standard deviation.
    pub scales: Vec<f64>,
    pub num_classes: u32,
}

impl GaussianMixture {
    pub fn new(centers: Vec<Vec<f64>>, center_labels: Vec<u32>, scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(NnkError::invalid("dimension must be positive"));
        }
        if let Some(s) = scales.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(NnkError::invalid(format!("scales must be positive, got {s}")));
        }
        if centers.is_empty() || centers.len() != center_labels.len() {
            return Err(NnkError::invalid("need one label per component"));
        }
        if let Some(c) = centers.iter().find(|c| c.len() != scales.len()) {
            return Err(NnkError::Dimension {
                expected: scales.len(),
                actual: c.len(),
            });
        }
        let num_classes = center_labels.iter().max().map_or(2, |&m| (m + 1).max(2));
        Ok(Self {
            centers,
            center_labels,
            scales,
            num_classes,
        })
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    /// Largest per-coordinate standard deviation.
    pub fn sigma(&self) -> f64 {
        self.scales.iter().copied().fold(0.0, f64::max)
    }

    /// Unit-variance classes centred at `±mu * e_0`, with `mu` chosen so the
    /// Bayes error is `bayes_error` in (0, 0.5].
    pub fn two_class(dim: usize, bayes_error: f64) -> Result<Self> {
        if !(bayes_error > 0.0 && bayes_error <= 0.5) {
            return Err(NnkError::invalid(format!(
                "Bayes error must lie in (0, 0.5], got {bayes_error}"
            )));
        }
        if dim == 0 {
            return Err(NnkError::invalid("dimension must be positive"));
        }
        // Invert Phi(-mu) = err by bisection.
        let (mut lo, mut hi) = (0.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(-mid) > bayes_error {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = 0.5 * (lo + hi);
        let mut plus = vec![0.0; dim];
        plus[0] = mu;
        let minus = plus.iter().map(|v| -v).collect();
        Self::new(vec![minus, plus], vec![0, 1], vec![1.0; dim])
    }

    /// `clusters` components at `radius * c` for random unit directions `c`,
    /// labels alternating 0, 1. The first `ambiguous` clusters get a second
    /// component of the opposite label at the same centre; when clusters do
    /// not overlap the Bayes error is `ambiguous / (clusters + ambiguous)`.
    ///
    /// `scales` is the shared per-coordinate standard deviation.
    pub fn clusters(
        clusters: usize,
        ambiguous: usize,
        radius: f64,
        scales: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if clusters == 0 || ambiguous > clusters {
            return Err(NnkError::invalid(
                "need at least one cluster and no more ambiguous clusters than clusters",
            ));
        }
        let dim = scales.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centers = Vec::with_capacity(clusters + ambiguous);
        let mut labels = Vec::with_capacity(clusters + ambiguous);
        for i in 0..clusters {
            let mut c: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = c.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            c.iter_mut().for_each(|v| *v *= radius / n);
            let label = (i % 2) as u32;
            if i < ambiguous {
                centers.push(c.clone());
                labels.push(1 - label);
            }
            centers.push(c);
            labels.push(label);
        }
        Self::new(centers, labels, scales)
    }

    /// `n` labelled points with ids `first_id..first_id + n`.
    pub fn sample(&self, n: usize, first_id: u64, seed: u64) -> Result<LabeledDataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = self.dim();
        let mut values = Vec::with_capacity(n * dim);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let c = rng.random_range(0..self.centers.len());
            for (&m, &s) in self.centers[c].iter().zip(&self.scales) {
                let z: f64 = rng.sample(StandardNormal);
                values.push((m + s * z) as f32);
            }
            labels.push(self.center_labels[c]);
        }
        let ids = (0..n as u64).map(|i| first_id + i).collect();
        LabeledDataset::new(EmbeddingSet::new(ids, dim, values)?, labels, self.num_classes)
    }

    /// Class with the largest posterior at `x`; ties to the lowest class.
    pub fn bayes_decision(&self, x: &[f64]) -> u32 {
        let log_densities: Vec<f64> = self
            .centers
            .iter()
            .map(|c| {
                let q: f64 = c
                    .iter()
                    .zip(x)
                    .zip(&self.scales)
                    .map(|((a, b), s)| (a - b) * (a - b) / (s * s))
                    .sum();
                -0.5 * q
            })
            .collect();
        let top = log_densities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut mass = vec![0.0; self.num_classes as usize];
        for (l, &label) in log_densities.iter().zip(&self.center_labels) {
            mass[label as usize] += (l - top).exp();
        }
        let mut best = 0;
        for c in 1..mass.len() {
            if mass[c] > mass[best] {
                best = c;
            }
        }
        best as u32
    }

    /// Monte Carlo estimate of the Bayes error from `samples` fresh draws.
    pub fn bayes_error(&self, samples: usize, seed: u64) -> Result<f64> {
        let d = self.sample(samples, 0, seed)?;
        let wrong = (0..d.len())
            .filter(|&i| {
                let x: Vec<f64> = d.row(i).iter().map(|&v| f64::from(v)).collect();
                self.bayes_decision(&x) != d.label(i)
            })
            .count();
        Ok(wrong as f64 / samples as f64)
    }
}

/// Flips the labels of `round(fraction * N)` distinct points (two classes:
/// `y -> 1 - y`; more classes: `y -> y + 1 mod C`).
pub fn flip_labels(dataset: &LabeledDataset, fraction: f64, seed: u64) -> Result<LabeledDataset> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(NnkError::invalid(format!("fraction must lie in [0, 1], got {fraction}")));
    }
    let n = dataset.len();
    let count = ((n as f64) * fraction).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = dataset.labels().to_vec();
    let c = dataset.num_classes();
    for i in sample(&mut rng, n, count.min(n)) {
        labels[i] = (labels[i] + 1) % c;
    }
    dataset.relabel(labels)
}

/// Adds `offset` to every row.
pub fn shift(points: &EmbeddingSet, offset: &[f64]) -> Result<EmbeddingSet> {
    if offset.len() != points.dim() {
        return Err(NnkError::Dimension {
            expected: points.dim(),
            actual: offset.len(),
        });
    }
    let values = points
        .rows()
        .flat_map(|row| row.iter().zip(offset).map(|(&v, &o)| (f64::from(v) + o) as f32))
        .collect();
    EmbeddingSet::new(points.ids().to_vec(), points.dim(), values)
}

/// Standard normal CDF, accurate to about 1e-7.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

// Numerical Recipes erfc with Chebyshev fit, relative error < 1.2e-7.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t * (-z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
        .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_class_bayes_error() {
        let m = GaussianMixture::two_class(10, 0.1).unwrap();
        assert!((m.centers[1][0] - 1.281_551_6).abs() < 1e-5);
        let mc = m.bayes_error(200_000, 4).unwrap();
        assert!((mc - 0.1).abs() < 0.004, "{mc}");
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.959_964) - 0.975).abs() < 1e-6);
    }

    #[test]
    fn sampling_is_seeded() {
        let m = GaussianMixture::clusters(4, 1, 10.0, vec![0.5; 3], 2).unwrap();
        let a = m.sample(50, 100, 7).unwrap();
        let b = m.sample(50, 100, 7).unwrap();
        assert_eq!(a.points().values(), b.points().values());
        assert_eq!(a.labels(), b.labels());
        assert_eq!(a.id(0), 100);
        assert_ne!(m.sample(50, 100, 8).unwrap().labels(), a.labels());
        for (c, &l) in m.centers.iter().zip(&m.center_labels).skip(2) {
            assert_eq!(m.bayes_decision(c), l);
        }
        assert_eq!(m.centers[0], m.centers[1]);
        assert_ne!(m.center_labels[0], m.center_labels[1]);
    }

    #[test]
    fn flip_changes_exact_count() {
        let m = GaussianMixture::two_class(2, 0.2).unwrap();
        let d = m.sample(200, 0, 1).unwrap();
        let f = flip_labels(&d, 0.1, 3).unwrap();
        let changed = d.labels().iter().zip(f.labels()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 20);
        assert!(flip_labels(&d, 1.5, 3).is_err());
    }

    #[test]
    fn shift_moves_every_row() {
        let p = EmbeddingSet::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.0]]).unwrap();
        let s = shift(&p, &[0.5, -2.0]).unwrap();
        assert_eq!(s.row(0), &[1.5, 0.0]);
        assert_eq!(s.row(1), &[-0.5, -2.0]);
        assert!(shift(&p, &[1.0]).is_err());
    }
}
