//! Clairvoyant optima, competitive ratios and closed-form bounds.

pub mod bounds;
pub mod bruteforce;
pub mod ratio;

use serde::{Deserialize, Serialize};

use crate::model::FulfillmentPlan;

pub use crate::instances::adversarial::analytic_opt;
pub use bounds::{bound_value, item_count_tradeoff, single_fdc_varying_gap, BoundId, BoundInputs, MULTI_FDC_VARYING_GAP};
pub use bruteforce::{bruteforce_opt, SearchLimits};
pub use ratio::{competitive_ratio, Ratio, RatioKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptMethod {
    BruteForce,
    AnalyticExact,
    /// The value is only an upper bound on the optimum.
    AnalyticUpperBound,
}

impl OptMethod {
    pub fn is_exact(self) -> bool {
        self != OptMethod::AnalyticUpperBound
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Distinct `(period, inventory)` states evaluated.
    pub states_expanded: u64,
    pub transitions: u64,
    pub cache_hits: u64,
    /// Cache hits that were re-expanded and compared.
    pub cache_checks: u64,
    /// Seconds.
    pub elapsed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub opt_cost: f64,
    /// One plan per period, when the oracle produces one.
    pub opt_plan: Option<Vec<FulfillmentPlan>>,
    pub method: OptMethod,
    pub stats: SearchStats,
}

impl OptResult {
    pub fn analytic(value: f64, exact: bool) -> Self {
        OptResult {
            opt_cost: value,
            opt_plan: None,
            method: if exact { OptMethod::AnalyticExact } else { OptMethod::AnalyticUpperBound },
            stats: SearchStats::default(),
        }
    }
}
