//! Small random instances for property checks against the exhaustive oracle.

use crate::model::{CostBounds, CostRegime, FulfillmentPlan, Instance, InventoryState, Shipment};
use crate::rng::Stream;

/// Size limits and cost ranges for [`tiny_instance`].
#[derive(Clone, Debug)]
pub struct TinyShape {
    pub n_max: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub t_max: usize,
    /// Largest per-item quantity in one order.
    pub s_max: i64,
    /// Largest initial stock of one item at one FDC.
    pub i_max: i64,
    pub regime: CostRegime,
    /// Fixed costs are drawn from `[f_lo, f_hi]`.
    pub f_lo: f64,
    pub f_hi: f64,
    /// `b / a` is drawn from `[1, spread_max]`.
    pub spread_max: f64,
}

impl Default for TinyShape {
    fn default() -> Self {
        TinyShape {
            n_max: 3,
            k_min: 1,
            k_max: 3,
            t_max: 5,
            s_max: 3,
            i_max: 3,
            regime: CostRegime::TimeVarying,
            f_lo: 0.5,
            f_hi: 10.0,
            spread_max: 4.0,
        }
    }
}

fn between(rng: &mut Stream, lo: usize, hi: usize) -> usize {
    lo + rng.below((hi - lo + 1) as u64) as usize
}

/// Draws one instance. Variable costs lie in the declared `[a, b]`; at least
/// one unit is ordered, so the optimum is positive.
pub fn tiny_instance(rng: &mut Stream, shape: &TinyShape) -> Instance {
    let n = between(rng, 1, shape.n_max);
    let k = between(rng, shape.k_min, shape.k_max);
    let horizon = between(rng, 1, shape.t_max);
    let dcs = k + 1;
    let fixed: Vec<f64> = (0..dcs).map(|_| rng.uniform(shape.f_lo, shape.f_hi)).collect();
    let a = rng.uniform(0.5, 2.0);
    let b = a * rng.uniform(1.0, shape.spread_max);
    let column = |rng: &mut Stream| -> Vec<f64> { (0..dcs * n).map(|_| rng.uniform(a, b)).collect() };
    let mut costs = Vec::with_capacity(dcs * horizon * n);
    match shape.regime {
        CostRegime::TimeInvariant => {
            let col = column(rng);
            for _ in 0..horizon {
                costs.extend_from_slice(&col);
            }
        }
        CostRegime::TimeVarying => {
            for _ in 0..horizon {
                costs.extend(column(rng));
            }
        }
    }
    let inventory: Vec<i64> = (0..k * n).map(|_| rng.below(shape.i_max as u64 + 1) as i64).collect();
    let mut orders: Vec<i64> = (0..horizon * n).map(|_| rng.below(shape.s_max as u64 + 1) as i64).collect();
    if orders.iter().all(|&q| q == 0) {
        let j = rng.below(orders.len() as u64) as usize;
        orders[j] = 1 + rng.below(shape.s_max.max(1) as u64) as i64;
    }
    Instance::new(n, k, horizon, fixed, costs, inventory, orders, shape.regime, Some(CostBounds { a, b }))
        .expect("tiny instance dimensions are consistent")
}

/// A uniformly random feasible plan sequence: each unit picks one of the DCs
/// that still holds the item (the RDC always qualifies).
pub fn random_feasible_plans(inst: &Instance, rng: &mut Stream) -> Vec<FulfillmentPlan> {
    let mut state = inst.initial_state();
    let mut plans = Vec::with_capacity(inst.horizon);
    for t in 0..inst.horizon {
        let order = inst.order(t);
        let mut left: Vec<Vec<i64>> =
            (0..inst.dcs()).map(|k| (0..inst.n).map(|i| if k == 0 { i64::MAX } else { state.level(k, i) }).collect()).collect();
        let mut qty = vec![vec![0i64; inst.n]; inst.dcs()];
        for (i, &demand) in order.iter().enumerate() {
            for _ in 0..demand {
                let open: Vec<usize> = (0..inst.dcs()).filter(|&k| left[k][i] > 0).collect();
                let k = open[rng.below(open.len() as u64) as usize];
                left[k][i] -= 1;
                qty[k][i] += 1;
            }
        }
        let lines: Vec<Shipment> = (0..inst.dcs())
            .flat_map(|k| (0..inst.n).map(move |i| (k, i)))
            .filter(|&(k, i)| qty[k][i] > 0)
            .map(|(k, i)| Shipment { dc: k, item: i, quantity: qty[k][i] })
            .collect();
        let plan = FulfillmentPlan::from_lines(inst.dcs(), inst.n, lines).expect("well-formed plan");
        state.apply(&plan, order).expect("random plan is feasible");
        plans.push(plan);
    }
    plans
}

/// Inventory before each period when following `plans`.
pub fn states_along(inst: &Instance, plans: &[FulfillmentPlan]) -> Vec<InventoryState> {
    let mut state = inst.initial_state();
    let mut out = Vec::with_capacity(plans.len());
    for (t, plan) in plans.iter().enumerate() {
        out.push(state.clone());
        state.apply(plan, inst.order(t)).expect("plans are feasible");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    #[test]
    fn draws_are_valid_and_nonempty() {
        let mut rng = Stream::new(5);
        for regime in [CostRegime::TimeVarying, CostRegime::TimeInvariant] {
            let shape = TinyShape { regime, ..TinyShape::default() };
            for _ in 0..200 {
                let inst = tiny_instance(&mut rng, &shape);
                assert!(validate_instance(&inst).is_empty());
                assert!(inst.total_units() > 0);
                assert_eq!(random_feasible_plans(&inst, &mut rng).len(), inst.horizon);
            }
        }
    }
}
