//! Non-negative kernel regression: the sparse weight solver, the kernel
//! ratio interval test and per-query neighborhoods.

mod kri;
mod neighborhood;
mod solver;

pub use self::kri::kri_admissible;
pub use self::neighborhood::{nnk_neighborhood, polytope_diameter, NnkNeighborhood, SupportEntry};
pub use self::solver::{
    gradient, kkt_residual, objective, solve_nnk, KktResidual, NnkWeights, DEFAULT_TOL,
    DUPLICATE_EPS, PIVOT_FLOOR,
};

pub(crate) use self::neighborhood::neighborhood_unchecked;
