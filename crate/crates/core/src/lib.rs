//! Sensitivity-sampling coresets for weighted k-means.
//!
//! The construction pipeline is:
//!
//! 1. [`seeding::bicriteria`] picks the cheapest of several D²-seedings.
//! 2. [`sensitivity::sensitivity_bound`] turns those centers into per-point
//!    sensitivity upper bounds.
//! 3. [`builder::importance_sample`] draws points proportionally to the
//!    bounds and reweights them so every query cost is estimated without bias.
//!
//! [`solver`] solves k-means on a coreset (Lloyd or exhaustive partition
//! search), [`pipeline`] composes coresets over streams and workers, and
//! [`harness`] measures the coreset error on finite query suites.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builder;
pub mod error;
pub mod harness;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod rng;
mod sampling;
pub mod seeding;
pub mod sensitivity;
pub mod solver;

pub use builder::{
    build_kmeans_coreset, importance_sample, recommended_m, uniform_baseline, BuildConfig, Coreset, Distribution,
    Provenance, SampleSizeSpec,
};
pub use error::{CoresetError, Result};
pub use harness::{coreset_error, default_suite, g_function, generate, hoeffding_m, DatasetKind, ErrorReport, QuerySuite};
pub use model::{point_cost, total_cost, whiten, CostModel, Query, SpdMatrix, WeightedDataset};
pub use pipeline::{distributed_build, DistributedPlan, MergeReduceTree, PartitionRule, StreamConfig};
pub use sampling::CumulativeTable;
pub use seeding::{bicriteria, d2_sample, Bicriteria, BicriteriaConfig};
pub use sensitivity::{exact_sensitivity_1means, grid_sensitivity_oracle, sensitivity_bound, SensitivityProfile};
pub use solver::{ptas_exhaustive, solve_via_coreset, weighted_lloyd, LloydConfig, Solution};
