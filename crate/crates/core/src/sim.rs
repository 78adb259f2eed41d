use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::model::{period_cost, validate_instance, FulfillmentPlan, Instance};
use crate::policy::{build_policy, PeriodView, PolicySpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceMode {
    #[default]
    Full,
    CostsOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub period: usize,
    pub gated: bool,
    pub repaired: bool,
    pub period_cost: f64,
    /// Present in full trace mode.
    pub plan: Option<FulfillmentPlan>,
    /// Flat `[k-1][i]`, present in full trace mode.
    pub inventory_after: Option<Vec<i64>>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub policy_id: String,
    pub seed: u64,
    pub total_cost: f64,
    pub trace: Vec<TraceRecord>,
    /// Whole run, seconds.
    pub wall_time: f64,
    /// Time spent inside the policy's decisions, seconds.
    pub decision_time: f64,
}

impl RunResult {
    pub fn gated_periods(&self) -> usize {
        self.trace.iter().filter(|r| r.gated).count()
    }

    pub fn repaired_periods(&self) -> usize {
        self.trace.iter().filter(|r| r.repaired).count()
    }

    pub fn plans(&self) -> Option<Vec<&FulfillmentPlan>> {
        self.trace.iter().map(|r| r.plan.as_ref()).collect()
    }

    pub fn decision_time_per_order(&self) -> f64 {
        self.decision_time / self.trace.len().max(1) as f64
    }
}

pub fn run_policy(instance: &Instance, spec: &PolicySpec, seed: u64) -> Result<RunResult> {
    run_policy_with(instance, spec, seed, TraceMode::Full)
}

/// Runs the online loop. Each period the policy sees only the current order,
/// the current cost column and the live inventory.
pub fn run_policy_with(instance: &Instance, spec: &PolicySpec, seed: u64, mode: TraceMode) -> Result<RunResult> {
    let violations = validate_instance(instance);
    if let Some(v) = violations.first() {
        return Err(config(format!(
            "invalid instance ({} violations, first at {}: {})",
            violations.len(),
            v.path,
            v.message
        )));
    }
    let started = Instant::now();
    let mut policy = build_policy(spec, &instance.header(), seed)?;
    let mut state = instance.initial_state();
    let mut trace = Vec::with_capacity(instance.horizon);
    let mut total = 0.0;
    let mut decision_time = 0.0;
    for t in 0..instance.horizon {
        let order = instance.order(t);
        let costs = instance.cost_column(t);
        let view = PeriodView { period: t, order, costs, inventory: &state };
        let tick = Instant::now();
        let decision = policy.decide(&view)?;
        decision_time += tick.elapsed().as_secs_f64();
        state.apply(&decision.plan, order)?;
        let cost = period_cost(&decision.plan, &instance.fixed_costs, &costs)?;
        total += cost;
        let full = mode == TraceMode::Full;
        trace.push(TraceRecord {
            period: t,
            gated: decision.gated,
            repaired: decision.repaired,
            period_cost: cost,
            inventory_after: full.then(|| state.levels().to_vec()),
            plan: full.then_some(decision.plan),
        });
    }
    Ok(RunResult {
        policy_id: policy.id().to_string(),
        seed,
        total_cost: total,
        trace,
        wall_time: started.elapsed().as_secs_f64(),
        decision_time,
    })
}
