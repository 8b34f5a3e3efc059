//! Frequency-domain power surrogate for a farm of submerged buoys.

pub mod body;
pub mod farm;
pub mod interaction;
pub mod landscape;
pub mod scenario;
pub mod spectrum;

pub use body::{single_body_power, BodyCoefficients, HydroCoefficients};
pub use farm::{farm_power, penalty, sum_distance_violation, EvaluatedLayout, FarmModel, FarmObjective};
pub use interaction::{interaction_factor, InteractionKernel};
pub use landscape::{scan_pto_landscape, PtoLandscape};
pub use scenario::{Direction, SeaState, WaveScenario, BUILTIN_SCENARIOS};
pub use spectrum::bretschneider_density;
