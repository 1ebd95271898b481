//! Similarity kernels with range `[0, 1]` and unit self-similarity.

use serde::{Deserialize, Serialize};

use crate::data::{norm, EmbeddingSet};
use crate::error::{NnkError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `(1 + cos(a, b)) / 2`
    Cosine,
    /// `exp(-|a - b|^2 / (2 sigma^2))`
    Gaussian,
}

impl std::str::FromStr for KernelKind {
    type Err = NnkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(KernelKind::Cosine),
            "gaussian" => Ok(KernelKind::Gaussian),
            other => Err(NnkError::invalid(format!("unknown kernel `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Gaussian bandwidth; carried but unused for the cosine kernel.
    pub sigma: f64,
}

impl KernelSpec {
    pub fn cosine() -> Self {
        Self {
            kind: KernelKind::Cosine,
            sigma: 1.0,
        }
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        let spec = Self {
            kind: KernelKind::Gaussian,
            sigma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == KernelKind::Gaussian && !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(NnkError::invalid(format!(
                "gaussian sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Kernel value given precomputed norms (ignored by the gaussian kernel).
    ///
    /// Callers pass norms from [`norm`], which keeps this bit-identical to
    /// [`eval_kernel`]. Zero norms must be rejected before calling.
    #[inline]
    pub(crate) fn similarity(&self, a: &[f32], norm_a: f64, b: &[f32], norm_b: f64) -> f64 {
        match self.kind {
            KernelKind::Cosine => {
                let cos = dot(a, b) / (norm_a * norm_b);
                (0.5 * (1.0 + cos)).clamp(0.0, 1.0)
            }
            KernelKind::Gaussian => {
                (-squared_distance(a, b) / (2.0 * self.sigma * self.sigma)).exp()
            }
        }
    }

    /// Rejects vectors the kernel is undefined on.
    pub(crate) fn check_norm(&self, norm: f64, index: usize) -> Result<()> {
        if self.kind == KernelKind::Cosine && norm == 0.0 {
            return Err(NnkError::ZeroNorm { index });
        }
        Ok(())
    }

    /// Validates every row of `points` for this kernel.
    pub fn check_points(&self, points: &EmbeddingSet) -> Result<()> {
        self.validate()?;
        (0..points.len()).try_for_each(|i| self.check_norm(points.row_norm(i), i))
    }
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

#[inline]
fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

pub fn eval_kernel(spec: &KernelSpec, a: &[f32], b: &[f32]) -> Result<f64> {
    spec.validate()?;
    if a.len() != b.len() {
        return Err(NnkError::Dimension {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    spec.check_norm(na, 0)?;
    spec.check_norm(nb, 1)?;
    Ok(spec.similarity(a, na, b, nb))
}

/// Candidate-candidate and candidate-query similarities for one query.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSlice {
    size: usize,
    /// Row-major `size x size`.
    pub(crate) kss: Vec<f64>,
    pub(crate) ksq: Vec<f64>,
}

impl KernelSlice {
    /// Builds a slice from explicit values, checking shape, range, symmetry
    /// and the unit diagonal.
    pub fn new(kss: Vec<Vec<f64>>, ksq: Vec<f64>) -> Result<Self> {
        let size = ksq.len();
        if kss.len() != size || kss.iter().any(|r| r.len() != size) {
            return Err(NnkError::invalid("kernel slice must be k x k with k query entries"));
        }
        let in_range = |v: f64| (0.0..=1.0).contains(&v);
        for (i, row) in kss.iter().enumerate() {
            if (row[i] - 1.0).abs() > 1e-12 {
                return Err(NnkError::invalid(format!("K_SS[{i}][{i}] = {} is not 1", row[i])));
            }
            for (j, &v) in row.iter().enumerate() {
                if !in_range(v) || (v - kss[j][i]).abs() > 1e-12 {
                    return Err(NnkError::invalid(format!(
                        "K_SS[{i}][{j}] = {v} breaks range or symmetry"
                    )));
                }
            }
        }
        if let Some(i) = ksq.iter().position(|&v| !in_range(v)) {
            return Err(NnkError::invalid(format!("K_Sq[{i}] = {} is outside [0, 1]", ksq[i])));
        }
        Ok(Self {
            size,
            kss: kss.into_iter().flatten().collect(),
            ksq,
        })
    }

    pub(crate) fn from_parts(size: usize, kss: Vec<f64>, ksq: Vec<f64>) -> Self {
        debug_assert_eq!(kss.len(), size * size);
        debug_assert_eq!(ksq.len(), size);
        Self { size, kss, ksq }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn kss(&self, i: usize, j: usize) -> f64 {
        self.kss[i * self.size + j]
    }

    pub fn ksq(&self) -> &[f64] {
        &self.ksq
    }

    /// Sub-slice on the given positions, in the given order.
    pub fn restrict(&self, positions: &[usize]) -> Self {
        let kss = positions
            .iter()
            .flat_map(|&i| positions.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.kss(i, j))
            .collect();
        let ksq = positions.iter().map(|&i| self.ksq[i]).collect();
        Self::from_parts(positions.len(), kss, ksq)
    }
}

pub fn kernel_slice(
    spec: &KernelSpec,
    points: &EmbeddingSet,
    candidates: &[usize],
    query: &[f32],
) -> Result<KernelSlice> {
    spec.validate()?;
    if query.len() != points.dim() {
        return Err(NnkError::Dimension {
            expected: points.dim(),
            actual: query.len(),
        });
    }
    let qn = norm(query);
    spec.check_norm(qn, usize::MAX).map_err(|_| NnkError::invalid("query has zero norm"))?;
    for (pos, &c) in candidates.iter().enumerate() {
        if c >= points.len() {
            return Err(NnkError::invalid(format!("candidate index {c} out of range")));
        }
        if candidates[..pos].contains(&c) {
            return Err(NnkError::invalid(format!("candidate index {c} repeated")));
        }
        spec.check_norm(points.row_norm(c), c)?;
    }
    Ok(slice_unchecked(spec, points, candidates, query, qn))
}

/// [`kernel_slice`] without validation; candidates must be valid and distinct.
pub(crate) fn slice_unchecked(
    spec: &KernelSpec,
    points: &EmbeddingSet,
    candidates: &[usize],
    query: &[f32],
    query_norm: f64,
) -> KernelSlice {
    let k = candidates.len();
    let mut kss = vec![0.0; k * k];
    for (a, &i) in candidates.iter().enumerate() {
        // Both kernels are exactly 1 on the diagonal; rounding is not.
        kss[a * k + a] = 1.0;
        for (b, &j) in candidates.iter().enumerate().skip(a + 1) {
            let v = spec.similarity(points.row(i), points.row_norm(i), points.row(j), points.row_norm(j));
            kss[a * k + b] = v;
            kss[b * k + a] = v;
        }
    }
    let ksq = candidates
        .iter()
        .map(|&i| spec.similarity(points.row(i), points.row_norm(i), query, query_norm))
        .collect();
    KernelSlice::from_parts(k, kss, ksq)
}
