//! Online order fulfillment across one regional and several front distribution
//! centers: gated priority-based greedy policies, baselines, clairvoyant
//! oracles, instance generators, a benchmark harness and a decision service.

pub mod baselines;
pub mod bench;
pub mod error;
pub mod instances;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod rng;
pub mod service;
pub mod sim;

pub use error::{Error, PlanViolation, Result};
pub use model::{
    apply_plan, period_cost, validate_instance, CostBounds, CostColumn, CostRegime, FulfillmentPlan, Instance,
    InventoryState, Shipment,
};
pub use policy::{build_policy, Decision, InstanceHeader, PeriodView, Policy, PolicySpec};
pub use sim::{run_policy, run_policy_with, RunResult, TraceMode, TraceRecord};
