//! Constrained derivative-free optimization for wave energy converter farms.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain`] holds farm geometry, the flat decision vector, evaluation
//!   budgets and seeded random streams.
//! * [`model`] is the objective: a frequency-domain power surrogate for a farm
//!   of spring-damper controlled buoys, with safe-distance penalisation.
//! * [`problem`] connects objectives to optimizers through metered,
//!   budget-aware evaluation and group-local sub-problems.
//! * [`optimizers`] contains the all-at-once search methods (DE, PSO,
//!   Nelder-Mead, (1+1)-EA, GWO, AGWO, SLPSO, SaNSDE) and chaotic maps.
//! * [`cooperative`] implements contribution tracking, online optimizer
//!   selection and the alternating position/PTO schedules.
//! * [`hcca`] is the one-at-a-time buoy placement pipeline with backtracking.
//! * [`harness`] runs seeded, repeated experiments and writes result tables.

pub mod benchmarks;
pub mod cooperative;
pub mod domain;
pub mod error;
pub mod harness;
pub mod hcca;
pub mod model;
pub mod optimizers;
pub mod problem;

pub use domain::{clamp_to_bounds, make_farm_config, Bounds, EvalBudget, FarmConfig, Layout, PtoProfile, RandomStream};
pub use error::{Error, Result};
pub use model::{EvaluatedLayout, FarmObjective, WaveScenario};
pub use problem::{Candidate, Evaluator, Objective, Problem};
