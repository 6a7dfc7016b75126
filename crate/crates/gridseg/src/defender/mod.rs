//! The network designer's feasible plans and the trilevel search.

mod model;
mod plan;
mod solve;
mod space;

pub use model::{build_defender_model, model_violations, DefenderModel, ModelEnclave};
pub use plan::{NewEnclave, SegmentationPlan};
pub use solve::{budget_sweep, solve_trilevel, solve_with, Oracle, SolveRecord, SolveStats};
pub use space::{enumerate_plans, PlanIndex, PlanOptions, PlanSpace};
