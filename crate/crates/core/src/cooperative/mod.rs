//! Cooperative optimisation over groups of decision variables: contribution
//! tracking, online optimizer selection and alternating schedules.

pub mod groups;
pub mod ledger;
pub mod schedule;

pub use groups::{decompose, decompose_dims, GroupKind, VariableGroup};
pub use ledger::{fitness_improvement, select_optimizer, update_accumulated, ContributionLedger, LedgerEntry};
pub use schedule::{alternating_schedule, ccos_run, optimize_group, CooperativeRun, GroupStep, Phase};
