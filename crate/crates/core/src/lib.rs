//! Non-negative kernel regression (NNK) neighborhoods over precomputed
//! embeddings, polytope interpolation estimates and leave-one-out diagnostics.
//!
//! ```
//! use nnk::{nnk_neighborhood, EmbeddingSet, KernelSpec, DEFAULT_TOL};
//!
//! let points = EmbeddingSet::from_rows(&[
//!     vec![1.0, 0.0],
//!     vec![0.0, 1.0],
//!     vec![1.0, 0.05],
//! ])
//! .unwrap();
//! let n = nnk_neighborhood(&KernelSpec::cosine(), &points, &[1.0, 1.0], 3, DEFAULT_TOL, &[])
//!     .unwrap();
//! assert!(n.k_hat <= 3);
//! ```

pub mod config;
pub mod data;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod kernel;
pub mod neighbors;
pub mod nnk_core;
pub mod synthetic;

pub use config::EvalConfig;
pub use data::{
    load_dataset, load_embeddings, save_dataset, split, DataFormat, EmbeddingSet,
    EmbeddingVector, LabeledDataset,
};
pub use error::{NnkError, Result};
pub use estimators::{
    biased_estimate, loss, plug_in_classify, unbiased_estimate, winn_estimate,
    InterpolationEstimate, LossKind, Method,
};
pub use evaluation::{
    holdout_risk, interpolation_spread, loo_concentration_bound, loo_evaluate, model_gap,
    neighbor_census, sweep_compare, LooReport,
};
pub use kernel::{eval_kernel, kernel_slice, KernelKind, KernelSlice, KernelSpec};
pub use neighbors::{knn, NeighborList};
pub use nnk_core::{kri_admissible, nnk_neighborhood, solve_nnk, NnkNeighborhood, DEFAULT_TOL};
