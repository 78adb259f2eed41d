//! Independent per-item rounding of the aggregate LP.

use std::collections::HashMap;

use log::debug;

use super::lp::{build_aggregate_lp, solve_lp, AggregateLp, LpSolution, LpStatus};
use super::{binary_support, OrderTypeDistribution};
use crate::error::{config, Error, Result};
use crate::model::{CostRegime, FulfillmentPlan, InventoryState, Shipment};
use crate::policy::{Decision, InstanceHeader, PeriodView, Policy};
use crate::rng::{tag, Stream};

/// Rounds one order of type `q`: each item independently picks DC `k` with
/// probability `x[q][i][k]`. A picked FDC without stock hands the unit to the
/// RDC. Returns the plan and whether any unit was handed over.
pub fn ipfc_decide(
    q: usize,
    lp: &AggregateLp,
    solution: &LpSolution,
    inventory: &InventoryState,
    rng: &mut Stream,
) -> (FulfillmentPlan, bool) {
    let mut lines = Vec::with_capacity(lp.types[q].len());
    let mut repaired = false;
    let mut weights = vec![0.0; lp.dcs];
    for (pos, &item) in lp.types[q].iter().enumerate() {
        for (k, w) in weights.iter_mut().enumerate() {
            *w = solution.values[lp.x(q, pos, k)].max(0.0);
        }
        let mut k = rng.categorical(&weights);
        if k != 0 && inventory.level(k, item) < 1 {
            repaired = true;
            k = 0;
        }
        lines.push(Shipment { dc: k, item, quantity: 1 });
    }
    lines.sort_unstable_by_key(|s| (s.dc, s.item));
    (FulfillmentPlan::from_sorted(lp.dcs, inventory.items(), lines), repaired)
}

pub struct IpfcPolicy {
    dist: OrderTypeDistribution,
    lookup: HashMap<Vec<usize>, usize>,
    fixed_costs: Vec<f64>,
    inventory: Vec<i64>,
    horizon: usize,
    solved: Option<(AggregateLp, LpSolution)>,
    rng: Stream,
}

impl IpfcPolicy {
    /// Needs time-invariant costs, the order-type distribution and the horizon.
    /// The LP is solved at the first decision, from that period's costs.
    pub fn new(header: &InstanceHeader, seed: u64) -> Result<Self> {
        if header.cost_regime != CostRegime::TimeInvariant {
            return Err(config("ipfc needs time-invariant variable costs"));
        }
        let dist = header.order_types.clone().ok_or_else(|| config("ipfc needs the order type distribution"))?;
        dist.validate(header.n)?;
        let horizon = header.horizon.ok_or_else(|| config("ipfc needs the horizon T"))?;
        Ok(IpfcPolicy {
            lookup: dist.index(),
            dist,
            fixed_costs: header.fixed_costs.clone(),
            inventory: header.inventory.clone(),
            horizon,
            solved: None,
            rng: Stream::substream(seed, tag::ROUNDING),
        })
    }

    pub fn solution(&self) -> Option<&LpSolution> {
        self.solved.as_ref().map(|(_, s)| s)
    }
}

impl Policy for IpfcPolicy {
    fn id(&self) -> &str {
        "ipfc"
    }

    fn decide(&mut self, view: &PeriodView<'_>) -> Result<Decision> {
        if self.solved.is_none() {
            let lp = build_aggregate_lp(&self.dist, &self.fixed_costs, &view.costs, &self.inventory, self.horizon)?;
            let sol = solve_lp(&lp, None)?;
            if sol.status != LpStatus::Optimal {
                return Err(Error::Lp(format!("aggregate LP is {:?}", sol.status)));
            }
            self.solved = Some((lp, sol));
        }
        let dcs = self.fixed_costs.len();
        if view.order.iter().all(|&q| q == 0) {
            return Ok(Decision { plan: FulfillmentPlan::zero(dcs, view.order.len()), gated: false, repaired: false });
        }
        let (lp, sol) = self.solved.as_ref().expect("solved above");
        let q = binary_support(view.order).and_then(|items| self.lookup.get(&items).copied());
        match q {
            Some(q) => {
                let (plan, repaired) = ipfc_decide(q, lp, sol, view.inventory, &mut self.rng);
                if repaired {
                    debug!("period {}: stockout, units moved to the RDC", view.period);
                }
                Ok(Decision { plan, gated: false, repaired })
            }
            None => {
                debug!("period {}: order is not a known type, shipping from the RDC", view.period);
                Ok(Decision { plan: FulfillmentPlan::single_source(dcs, 0, view.order), gated: false, repaired: true })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp_with(values: Vec<f64>) -> (AggregateLp, LpSolution) {
        let dist = OrderTypeDistribution { types: vec![vec![0]], probabilities: vec![1.0] };
        let col = [1.0, 1.0];
        let lp = build_aggregate_lp(
            &dist,
            &[1.0, 1.0],
            &crate::model::CostColumn::new(&col, 1).unwrap(),
            &[1],
            1,
        )
        .unwrap();
        let sol = LpSolution {
            status: LpStatus::Optimal,
            values,
            objective: 0.0,
            max_residual: 0.0,
            objective_gap: 0.0,
            iterations: 0,
        };
        (lp, sol)
    }

    #[test]
    fn degenerate_rdc_share() {
        let (lp, sol) = lp_with(vec![1.0, 0.0, 1.0, 0.0]);
        let inv = InventoryState::new(1, 1, vec![5]);
        let mut rng = Stream::new(1);
        for _ in 0..100 {
            let (plan, repaired) = ipfc_decide(0, &lp, &sol, &inv, &mut rng);
            assert_eq!(plan.quantity(0, 0), 1);
            assert!(!repaired);
        }
    }

    #[test]
    fn stockout_falls_back() {
        let (lp, sol) = lp_with(vec![0.0, 1.0, 0.0, 1.0]);
        let inv = InventoryState::new(1, 1, vec![0]);
        let (plan, repaired) = ipfc_decide(0, &lp, &sol, &inv, &mut Stream::new(2));
        assert_eq!(plan.quantity(0, 0), 1);
        assert!(repaired);
    }

    #[test]
    fn even_split_frequency() {
        let (lp, sol) = lp_with(vec![0.5, 0.5, 1.0, 1.0]);
        let inv = InventoryState::new(1, 1, vec![1]);
        let mut rng = Stream::new(3);
        let fdc = (0..10_000).filter(|_| ipfc_decide(0, &lp, &sol, &inv, &mut rng).0.quantity(1, 0) == 1).count();
        assert!((fdc as f64 / 10_000.0 - 0.5).abs() < 0.02, "{fdc}");
    }
}
