//! Leave-one-out risk, interpolation spread, neighbor census, k sweeps,
//! model-gap reporting and the leave-one-out concentration bound.

mod bound;
mod census;
mod gap;
mod histogram;
mod loo;
mod spread;
mod sweep;

pub use self::bound::{loo_concentration_bound, ConcentrationBound};
pub use self::census::{compare_census, neighbor_census, CensusComparison, CensusSummary};
pub use self::gap::{model_gap, ModelGap};
pub use self::histogram::{Histogram, DEFAULT_BINS};
pub use self::loo::{holdout_risk, loo_evaluate, LooRecord, LooReport};
pub use self::spread::interpolation_spread;
pub use self::sweep::{sweep_compare, sweep_csv, EvalMode, SweepRow};
