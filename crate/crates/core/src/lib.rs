//! Generalized Sobol' indices: exact variance-component algebra on subsets of
//! input coordinates, analytic test functions, and pick-and-freeze Monte Carlo
//! estimators with evaluation-cost accounting.

pub mod catalog;
pub mod engine;
pub mod error;
pub mod models;
pub mod spec;
pub mod subset;
pub mod tables;
pub mod verify;

pub use engine::{
    estimate, estimate_batch, estimate_bias_corrected, estimate_mean_corrected, lower_index_unbiased,
    replicate_study, Correction, EstimateResult, SampleConfig, StudyReport,
};
pub use error::{GsiError, Result};
pub use models::{AnyModel, GridFunction, IndexKind, MinModel, Model, ProductModel};
pub use spec::{batch_cost, compose_bilinear, compose_simple, compose_square, GsiSpec};
pub use subset::{complement, nxor_set, subsets_of, xor_set, SubsetMask};
