//! Contextual combinatorial Thompson sampling with budget (CCTSB) for
//! multi-objective epidemic-intervention planning.
//!
//! The crate bundles the learner, its context-free and random baselines, a
//! simulated intervention world, the cases/budget metrics with pareto
//! frontier aggregation, and a reproducible experiment harness. Numeric
//! code is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! the common `f64` instantiations.

// Index loops mirror the matrix formulas; negated comparisons also reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cctsb;
pub mod cli;
pub mod domain;
pub mod envworld;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod policies;
pub mod scalar;

pub use domain::{
    covid_npi_preset, plan_count, small_world_preset, validate_action, ActionSpace, ActionVector,
    MixMode,
};
pub use error::{Error, Result};
pub use harness::{derive_seed, run_experiment, run_trial, ExperimentPlan, ExperimentResult};
pub use policies::{Policy, PolicyConfig};
pub use scalar::Scalar;

pub type Context = domain::Context<f64>;
pub type Feedback = domain::Feedback<f64>;
pub type RewardMixer = domain::RewardMixer<f64>;
pub type SymMatrix = linalg::SymMatrix<f64>;
pub type LowerTriangular = linalg::LowerTriangular<f64>;
pub type CctsbConfig = cctsb::CctsbConfig<f64>;
pub type CctsbState = cctsb::CctsbState<f64>;
pub type EnvConfig = envworld::EnvConfig<f64>;
pub type EpidemicEnv = envworld::EpidemicEnv<f64>;
pub type TrialTrace = envworld::TrialTrace<f64>;

pub type CctsbState32 = cctsb::CctsbState<f32>;
pub type EpidemicEnv32 = envworld::EpidemicEnv<f32>;
