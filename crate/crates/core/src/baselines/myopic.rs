//! Exact single-period cost minimization over DC activation sets.

use crate::error::{config, Error, Result};
use crate::model::{period_cost_unchecked, CostColumn, FulfillmentPlan, InventoryState, Shipment};
use crate::policy::{Decision, InstanceHeader, PeriodView, Policy};

pub const DEFAULT_MAX_FDCS: usize = 20;

/// Cheapest assignment of the order within an activation set: every unit goes
/// to the cheapest active DC that still has stock, smaller index on ties.
/// Returns `None` when the set cannot cover the order.
fn assign(order: &[i64], inventory: &InventoryState, costs: &CostColumn<'_>, active: &[usize]) -> Option<FulfillmentPlan> {
    let mut lines = Vec::new();
    let mut ranked = active.to_vec();
    for (item, &demand) in order.iter().enumerate() {
        if demand <= 0 {
            continue;
        }
        ranked.sort_by(|&x, &y| costs.get(x, item).total_cmp(&costs.get(y, item)).then(x.cmp(&y)));
        let mut remaining = demand;
        for &k in &ranked {
            let take = if k == 0 { remaining } else { remaining.min(inventory.level(k, item)) };
            if take > 0 {
                lines.push(Shipment { dc: k, item, quantity: take });
                remaining -= take;
            }
            if remaining == 0 {
                break;
            }
        }
        if remaining > 0 {
            return None;
        }
    }
    lines.sort_unstable_by_key(|s| (s.dc, s.item));
    Some(FulfillmentPlan::from_sorted(inventory.fdcs() + 1, order.len(), lines))
}

struct Best {
    cost: f64,
    support: Vec<usize>,
    dense: Vec<Vec<i64>>,
    plan: Option<FulfillmentPlan>,
}

impl Best {
    /// Order: cost, then fewer DCs, then lexicographic support, then lexicographic plan.
    fn offer(&mut self, plan: FulfillmentPlan, cost: f64) {
        if cost > self.cost {
            return;
        }
        let support = plan.active_dcs();
        if cost == self.cost {
            let key = (support.len(), &support);
            let cur = (self.support.len(), &self.support);
            if key > cur {
                return;
            }
            if key == cur {
                let dense = plan.to_dense();
                if dense >= self.dense {
                    return;
                }
            }
        }
        self.dense = plan.to_dense();
        self.cost = cost;
        self.support = support;
        self.plan = Some(plan);
    }
}

/// The plan minimizing this period's cost exactly.
///
/// Activation sets are explored depth-first over DCs sorted by fixed cost, and
/// a branch is cut once its fixed cost alone exceeds the best cost found.
/// FDCs holding none of the ordered items are never activated.
pub fn myopic_decide(
    order: &[i64],
    inventory: &InventoryState,
    costs: &CostColumn<'_>,
    fixed_costs: &[f64],
) -> Result<FulfillmentPlan> {
    let dcs = fixed_costs.len();
    if order.iter().all(|&q| q == 0) {
        return Ok(FulfillmentPlan::zero(dcs, order.len()));
    }
    let mut candidates: Vec<usize> = std::iter::once(0)
        .chain((1..dcs).filter(|&k| order.iter().enumerate().any(|(i, &q)| q > 0 && inventory.level(k, i) > 0)))
        .collect();
    candidates.sort_by(|&x, &y| fixed_costs[x].total_cmp(&fixed_costs[y]).then(x.cmp(&y)));

    let mut best = Best { cost: f64::INFINITY, support: Vec::new(), dense: Vec::new(), plan: None };
    let mut active = Vec::with_capacity(candidates.len());
    explore(0, 0.0, &candidates, &mut active, order, inventory, costs, fixed_costs, &mut best);
    best.plan.ok_or_else(|| Error::Invariant("no activation set covers the order".into()))
}

#[allow(clippy::too_many_arguments)]
fn explore(
    next: usize,
    fixed: f64,
    candidates: &[usize],
    active: &mut Vec<usize>,
    order: &[i64],
    inventory: &InventoryState,
    costs: &CostColumn<'_>,
    fixed_costs: &[f64],
    best: &mut Best,
) {
    if !active.is_empty() {
        let mut sorted = active.clone();
        sorted.sort_unstable();
        if let Some(plan) = assign(order, inventory, costs, &sorted) {
            let cost = period_cost_unchecked(&plan, fixed_costs, costs);
            best.offer(plan, cost);
        }
    }
    for j in next..candidates.len() {
        let k = candidates[j];
        let f = fixed + fixed_costs[k];
        // candidates are sorted by fixed cost, so every later branch is at least as expensive
        if f > best.cost {
            break;
        }
        active.push(k);
        explore(j + 1, f, candidates, active, order, inventory, costs, fixed_costs, best);
        active.pop();
    }
}

pub struct MyopicPolicy {
    fixed_costs: Vec<f64>,
}

impl MyopicPolicy {
    pub fn new(header: &InstanceHeader, max_fdcs: Option<usize>) -> Result<Self> {
        let limit = max_fdcs.unwrap_or(DEFAULT_MAX_FDCS);
        if header.k > limit {
            return Err(config(format!("myopic enumeration is limited to {limit} FDCs, instance has {}", header.k)));
        }
        Ok(MyopicPolicy { fixed_costs: header.fixed_costs.clone() })
    }
}

impl Policy for MyopicPolicy {
    fn id(&self) -> &str {
        "myopic"
    }

    fn decide(&mut self, view: &PeriodView<'_>) -> Result<Decision> {
        let plan = myopic_decide(view.order, view.inventory, &view.costs, &self.fixed_costs)?;
        Ok(Decision { plan, gated: false, repaired: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::period_cost;

    fn two_fdc_case(f0: f64) -> (FulfillmentPlan, f64) {
        // FDC 1 stocks item 0, FDC 2 stocks item 1, every unit costs 1
        let inv = InventoryState::new(2, 2, vec![1, 0, 0, 1]);
        let col = [1.0; 6];
        let costs = CostColumn::new(&col, 2).unwrap();
        let fixed = [f0, 3.0, 3.0];
        let plan = myopic_decide(&[1, 1], &inv, &costs, &fixed).unwrap();
        let cost = period_cost(&plan, &fixed, &costs).unwrap();
        (plan, cost)
    }

    #[test]
    fn prefers_rdc_when_cheaper() {
        let (plan, cost) = two_fdc_case(5.0);
        assert_eq!(cost, 7.0);
        assert_eq!(plan.active_dcs(), vec![0]);
    }

    #[test]
    fn uses_both_fdcs_when_cheaper() {
        let (plan, cost) = two_fdc_case(10.0);
        assert_eq!(cost, 8.0);
        assert_eq!(plan.active_dcs(), vec![1, 2]);
    }

    #[test]
    fn empty_order() {
        let inv = InventoryState::new(1, 1, vec![1]);
        let col = [1.0; 2];
        let plan = myopic_decide(&[0], &inv, &CostColumn::new(&col, 1).unwrap(), &[1.0, 1.0]).unwrap();
        assert!(plan.is_zero());
    }

    #[test]
    fn cost_ties_prefer_fewer_dcs() {
        // FDC alone: 2 + 2; RDC alone: 2 + 2; tie goes to the smaller support, then smaller index
        let inv = InventoryState::new(1, 1, vec![5]);
        let col = [1.0, 1.0];
        let plan = myopic_decide(&[2], &inv, &CostColumn::new(&col, 1).unwrap(), &[2.0, 2.0]).unwrap();
        assert_eq!(plan.active_dcs(), vec![0]);
    }
}
