use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{period_cost_unchecked, CostColumn, FulfillmentPlan};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GatingCondition {
    None,
    /// Fires when the order has more than `theta` units.
    OrderSize { theta: f64 },
    /// Fires when the order has at most `theta` units.
    SmallOrder { theta: f64 },
    CostComparison,
    RandomizedCostComparison { f0: f64, f1: f64 },
}

/// Where a fired gate sends the whole order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateTarget {
    #[default]
    Rdc,
    Fdc,
}

pub fn gate_order_size(order: &[i64], theta: f64) -> bool {
    order.iter().sum::<i64>() as f64 > theta
}

pub fn gate_small_order(order: &[i64], theta: f64) -> bool {
    order.iter().sum::<i64>() as f64 <= theta
}

/// Cost of shipping the whole order from the RDC.
pub fn rdc_only_cost(fixed_costs: &[f64], costs: &CostColumn<'_>, order: &[i64]) -> f64 {
    let c0 = costs.dc(0);
    let mut variable = 0.0;
    let mut units = 0;
    for (i, &q) in order.iter().enumerate() {
        if q != 0 {
            variable += c0[i] * q as f64;
            units += q;
        }
    }
    if units > 0 {
        fixed_costs[0] + variable
    } else {
        variable
    }
}

/// Fires iff the greedy plan costs strictly more than RDC-only.
pub fn gate_cost_comparison(
    greedy: &FulfillmentPlan,
    fixed_costs: &[f64],
    costs: &CostColumn<'_>,
    order: &[i64],
) -> bool {
    period_cost_unchecked(greedy, fixed_costs, costs) > rdc_only_cost(fixed_costs, costs, order)
}

/// Probability of routing the order to the RDC, given the variable-cost saving
/// `x` the greedy plan gets from the FDC.
pub fn randomized_gate_probability(x: f64, f0: f64, f1: f64) -> Result<f64> {
    if !(f0 > 0.0 && f1 > 0.0 && f0.is_finite() && f1.is_finite()) {
        return Err(domain(format!("fixed costs must be positive, got f0 = {f0}, f1 = {f1}")));
    }
    if !(x >= 0.0) {
        return Err(domain(format!("cost difference must be nonnegative, got {x}")));
    }
    if x <= f1 {
        return Ok(1.0);
    }
    let upper = f1.max(f1 * f1 / f0 - f0);
    if x > upper {
        return Ok(0.0);
    }
    let p = (f1 * f1 - (f0 + x) * f0) / (f1 * f1 + (f0 + x) * (x - f1));
    Ok(p.clamp(0.0, 1.0))
}

/// Order-size threshold balancing the fixed-cost terms of the order-size policy.
pub fn theta_default(f0: f64, f_min: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(domain(format!("a must be positive, got {a}")));
    }
    if b < a || f0 < 0.0 {
        return Err(domain(format!("need b >= a and f0 >= 0, got a = {a}, b = {b}, f0 = {f0}")));
    }
    let d = f_min - b;
    let theta = (f0 / a + d * d / (4.0 * a * a)).sqrt() - d / (2.0 * a);
    Ok(theta.max(0.0))
}

/// `(eta, theta)` for the order-size adjusted policy: `eta = sqrt(max{f0/2, b}/a)`,
/// `theta = f0 / (2 a eta)`.
pub fn order_size_adjv_params(f0: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || b < a {
        return Err(domain(format!("need 0 < a <= b, got a = {a}, b = {b}")));
    }
    let eta = ((f0 / 2.0).max(b) / a).sqrt();
    Ok((eta, f0 / (2.0 * a * eta)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BetterOfTwoChoice {
    CostComparisonAdjv,
    OrderSizeAdjv { eta: f64, theta: f64 },
}

/// Static choice between the two single-FDC policies by their worst-case guarantees.
pub fn better_of_two_select(f0: f64, f1: f64, a: f64, b: f64) -> Result<BetterOfTwoChoice> {
    if !(a > 0.0) || b < a {
        return Err(domain(format!("need 0 < a <= b, got a = {a}, b = {b}")));
    }
    if f0 <= f1 {
        return Ok(BetterOfTwoChoice::CostComparisonAdjv);
    }
    let ratio = (b / a).sqrt();
    let cc_bound = 1.0 + (f0 / f1).max(ratio);
    let os_bound = (4.0 + 2f64.sqrt()) * (f0 / (2.0 * a)).sqrt().max(ratio);
    if cc_bound <= os_bound {
        return Ok(BetterOfTwoChoice::CostComparisonAdjv);
    }
    let (eta, theta) = order_size_adjv_params(f0, a, b)?;
    Ok(BetterOfTwoChoice::OrderSizeAdjv { eta, theta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_size_gate() {
        let theta = 4.5106;
        assert!(gate_order_size(&[2, 3], theta));
        assert!(!gate_order_size(&[4], theta));
        assert!(gate_order_size(&[1], 0.0));
        assert!(gate_small_order(&[2], 2.0));
        assert!(!gate_small_order(&[3], 2.0));
    }

    fn k1(f1: f64, inv: i64) -> bool {
        use crate::model::InventoryState;
        use crate::policy::priority::{greedy_plan, Ranking};
        let fixed = [10.0, f1];
        let col = [2.0, 1.0];
        let costs = CostColumn::new(&col, 1).unwrap();
        let state = InventoryState::new(1, 1, vec![inv]);
        let plan = greedy_plan(&[3], &state, &Ranking::Shared(vec![1, 0]));
        gate_cost_comparison(&plan, &fixed, &costs, &[3])
    }

    #[test]
    fn cost_comparison_gate_cases() {
        assert!(!k1(1.0, 3));
        // 1 + 1 + 10 + 4 = 16 against 16: a tie does not fire
        assert!(!k1(1.0, 1));
        assert!(k1(100.0, 3));
    }

    #[test]
    fn randomized_probability_regions() {
        assert_eq!(randomized_gate_probability(2.0, 1.0, 2.0).unwrap(), 1.0);
        let p = randomized_gate_probability(2.5, 1.0, 2.0).unwrap();
        assert!((p - 2.0 / 23.0).abs() < 1e-12);
        assert_eq!(randomized_gate_probability(4.0, 1.0, 2.0).unwrap(), 0.0);
        assert!(randomized_gate_probability(1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn theta_examples() {
        assert!((theta_default(50.0, 5.0, 8.0, 30.0).unwrap() - 4.51062).abs() < 1e-5);
        assert_eq!(theta_default(0.0, 40.0, 8.0, 30.0).unwrap(), 0.0);
        let golden = (1.25f64).sqrt() + 0.5;
        assert!((theta_default(1.0, 0.0, 1.0, 1.0).unwrap() - golden).abs() < 1e-12);
        assert!(theta_default(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn theta_minimizes_the_worst_term() {
        // the default threshold balances theta against (f0 + b theta)/(f_min + a theta)
        let (f0, fm, a, b) = (50.0, 5.0, 8.0, 30.0);
        let worst = |t: f64| t.max((f0 + b * t) / (fm + a * t)).max(b / a);
        let theta = theta_default(f0, fm, a, b).unwrap();
        let best_grid = (1..20000).map(|j| worst(j as f64 * 1e-3)).fold(f64::INFINITY, f64::min);
        assert!(worst(theta) <= best_grid + 1e-9);
    }

    #[test]
    fn better_of_two_branches() {
        assert_eq!(better_of_two_select(1.0, 10.0, 1.0, 4.0).unwrap(), BetterOfTwoChoice::CostComparisonAdjv);
        match better_of_two_select(10000.0, 1.0, 1.0, 1.0).unwrap() {
            BetterOfTwoChoice::OrderSizeAdjv { eta, theta } => {
                assert!((eta - 5000f64.sqrt()).abs() < 1e-9);
                assert!((theta - 70.7107).abs() < 1e-4);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(better_of_two_select(3.0, 3.0, 2.0, 2.0).unwrap(), BetterOfTwoChoice::CostComparisonAdjv);
    }
}
