//! Per-order exact optimization and LP-rounding baselines.

pub mod ipfc;
pub mod lp;
pub mod myopic;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

pub use ipfc::{ipfc_decide, IpfcPolicy};
pub use lp::{build_aggregate_lp, solve_lp, AggregateLp, LpSolution, LpStatus};
pub use myopic::{myopic_decide, MyopicPolicy, DEFAULT_MAX_FDCS};

/// Binary-demand order types: each type is a set of items requested together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderTypeDistribution {
    /// Sorted item indices per type.
    pub types: Vec<Vec<usize>>,
    pub probabilities: Vec<f64>,
}

impl OrderTypeDistribution {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.types.len() != self.probabilities.len() {
            return Err(config("order types and probabilities differ in length"));
        }
        if self.probabilities.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(config("order type probabilities must be finite and nonnegative"));
        }
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(config(format!("order type probabilities sum to {total}, not 1")));
        }
        for (q, items) in self.types.iter().enumerate() {
            if items.is_empty() {
                return Err(config(format!("order type {q} is empty")));
            }
            if items.windows(2).any(|w| w[0] >= w[1]) || items.iter().any(|&i| i >= n) {
                return Err(config(format!("order type {q} must list distinct items below {n} in increasing order")));
            }
        }
        Ok(())
    }

    /// Map from item set to the first type with that set.
    pub fn index(&self) -> HashMap<Vec<usize>, usize> {
        let mut map = HashMap::with_capacity(self.types.len());
        for (q, items) in self.types.iter().enumerate() {
            map.entry(items.clone()).or_insert(q);
        }
        map
    }
}

/// Items of a binary order, or `None` if some quantity exceeds one.
pub fn binary_support(order: &[i64]) -> Option<Vec<usize>> {
    let mut items = Vec::new();
    for (i, &q) in order.iter().enumerate() {
        match q {
            0 => {}
            1 => items.push(i),
            _ => return None,
        }
    }
    Some(items)
}
