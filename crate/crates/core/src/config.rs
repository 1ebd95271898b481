use serde::{Deserialize, Serialize};

use crate::error::{NnkError, Result};
use crate::estimators::{LossKind, Method};
use crate::kernel::KernelSpec;
use crate::nnk_core::DEFAULT_TOL;

/// Evaluation settings; embedded verbatim in every report.
///
/// `threads` is not serialized: results do not depend on it, and
/// reports must be byte-identical across thread counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub kernel: KernelSpec,
    pub k: usize,
    pub tol: f64,
    pub method: Method,
    pub loss: LossKind,
    /// Worker threads; 0 picks the number of available cores.
    #[serde(skip)]
    pub threads: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::cosine(),
            k: 50,
            tol: DEFAULT_TOL,
            method: Method::Nnk,
            loss: LossKind::ZeroOne,
            threads: 0,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.k == 0 {
            return Err(NnkError::invalid("k must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(NnkError::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }

    pub fn with_method(&self, method: Method) -> Self {
        Self {
            method,
            ..self.clone()
        }
    }
}
