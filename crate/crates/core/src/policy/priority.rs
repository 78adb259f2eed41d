use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::model::{CostColumn, FulfillmentPlan, InventoryState, Shipment};

/// How the single FDC is compared against the RDC under the adjusted rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adjustment {
    /// FDC first iff `c_1 < c_0 / eta`.
    Eta(f64),
    /// FDC first iff `c_1 < c_0 * scale`.
    Scale(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PriorityRule {
    FixedCost,
    VariableCost,
    AdjustedVariableCost { adjustment: Adjustment },
    /// One total order over `0..=K` per item, or a single order shared by all items.
    Explicit { order: Vec<Vec<usize>> },
}

/// Per-item ranking of DCs, most preferred first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ranking {
    Shared(Vec<usize>),
    PerItem(Vec<Vec<usize>>),
}

impl Ranking {
    #[inline]
    pub fn for_item(&self, item: usize) -> &[usize] {
        match self {
            Ranking::Shared(r) => r,
            Ranking::PerItem(rs) => &rs[item],
        }
    }

    /// True if `a` strictly precedes `b` for this item.
    pub fn precedes(&self, item: usize, a: usize, b: usize) -> bool {
        for &k in self.for_item(item) {
            if k == a {
                return true;
            }
            if k == b {
                return false;
            }
        }
        false
    }
}

fn sorted_by(values: impl Fn(usize) -> f64, dcs: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..dcs).collect();
    idx.sort_by(|&x, &y| values(x).total_cmp(&values(y)).then(x.cmp(&y)));
    idx
}

fn is_permutation(order: &[usize], dcs: usize) -> bool {
    let mut seen = vec![false; dcs];
    order.len() == dcs
        && order.iter().all(|&k| k < dcs && !std::mem::replace(&mut seen[k], true))
}

impl PriorityRule {
    /// Whether the ranking ignores variable costs entirely.
    pub fn time_independent(&self) -> bool {
        matches!(self, PriorityRule::FixedCost | PriorityRule::Explicit { .. })
    }

    pub fn validate(&self, dcs: usize, n: usize) -> Result<()> {
        match self {
            PriorityRule::AdjustedVariableCost { adjustment } => {
                if dcs != 2 {
                    return Err(config("adjusted-variable-cost priority needs exactly one FDC"));
                }
                match *adjustment {
                    Adjustment::Eta(eta) if !(eta >= 1.0 && eta.is_finite()) => {
                        Err(config(format!("eta must be a finite value >= 1, got {eta}")))
                    }
                    Adjustment::Scale(s) if !(s > 0.0 && s.is_finite()) => {
                        Err(config(format!("scale must be positive, got {s}")))
                    }
                    _ => Ok(()),
                }
            }
            PriorityRule::Explicit { order } => {
                if order.len() != 1 && order.len() != n {
                    return Err(config(format!("explicit ranking needs 1 or {n} orders, got {}", order.len())));
                }
                match order.iter().position(|o| !is_permutation(o, dcs)) {
                    Some(i) => Err(config(format!("explicit ranking {i} is not a permutation of 0..{dcs}"))),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// Rankings for the current period. Ties go to the smaller DC index.
    pub fn rank(&self, fixed_costs: &[f64], costs: &CostColumn<'_>) -> Ranking {
        let dcs = fixed_costs.len();
        match self {
            PriorityRule::FixedCost => Ranking::Shared(sorted_by(|k| fixed_costs[k], dcs)),
            PriorityRule::VariableCost => Ranking::PerItem(
                (0..costs.items()).map(|i| sorted_by(|k| costs.get(k, i), dcs)).collect(),
            ),
            PriorityRule::AdjustedVariableCost { adjustment } => Ranking::PerItem(
                (0..costs.items())
                    .map(|i| {
                        let (c0, c1) = (costs.get(0, i), costs.get(1, i));
                        let fdc_first = match *adjustment {
                            Adjustment::Eta(eta) => c1 < c0 / eta,
                            Adjustment::Scale(s) => c1 < c0 * s,
                        };
                        if fdc_first {
                            vec![1, 0]
                        } else {
                            vec![0, 1]
                        }
                    })
                    .collect(),
            ),
            PriorityRule::Explicit { order } => {
                if order.len() == 1 {
                    Ranking::Shared(order[0].clone())
                } else {
                    Ranking::PerItem(order.clone())
                }
            }
        }
    }
}

/// Fills each item from the DCs ranked ahead of the RDC, in order, each up to
/// its inventory; the RDC takes whatever is left.
pub fn greedy_plan(order: &[i64], inventory: &InventoryState, ranking: &Ranking) -> FulfillmentPlan {
    let dcs = inventory.fdcs() + 1;
    let mut lines = Vec::new();
    for (item, &demand) in order.iter().enumerate() {
        if demand <= 0 {
            continue;
        }
        let mut remaining = demand;
        for &k in ranking.for_item(item) {
            if k == 0 || remaining == 0 {
                break;
            }
            let take = remaining.min(inventory.level(k, item));
            if take > 0 {
                lines.push(Shipment { dc: k, item, quantity: take });
                remaining -= take;
            }
        }
        if remaining > 0 {
            lines.push(Shipment { dc: 0, item, quantity: remaining });
        }
    }
    lines.sort_unstable_by_key(|s| (s.dc, s.item));
    FulfillmentPlan::from_sorted(dcs, order.len(), lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturates_in_priority_order() {
        let inv = InventoryState::new(2, 1, vec![3, 4]);
        let plan = greedy_plan(&[5], &inv, &Ranking::Shared(vec![1, 2, 0]));
        assert_eq!((plan.quantity(1, 0), plan.quantity(2, 0), plan.quantity(0, 0)), (3, 2, 0));
    }

    #[test]
    fn zero_demand_gives_zero_plan() {
        let inv = InventoryState::new(2, 1, vec![3, 4]);
        assert!(greedy_plan(&[0], &inv, &Ranking::Shared(vec![1, 2, 0])).is_zero());
    }

    #[test]
    fn rdc_first_ships_everything_from_rdc() {
        let inv = InventoryState::new(1, 1, vec![10]);
        let plan = greedy_plan(&[4], &inv, &Ranking::Shared(vec![0, 1]));
        assert_eq!((plan.quantity(1, 0), plan.quantity(0, 0)), (0, 4));
    }

    #[test]
    fn fixed_cost_ties_prefer_smaller_index() {
        let col = [0.0; 4];
        let c = CostColumn::new(&col, 1).unwrap();
        let r = PriorityRule::FixedCost.rank(&[5.0, 2.0, 2.0, 1.0], &c);
        assert_eq!(r.for_item(0), &[3, 1, 2, 0]);
    }

    #[test]
    fn variable_cost_ranking_per_item() {
        // dc-major: c_0 = (3, 1), c_1 = (2, 1)
        let col = [3.0, 1.0, 2.0, 1.0];
        let c = CostColumn::new(&col, 2).unwrap();
        let r = PriorityRule::VariableCost.rank(&[0.0, 0.0], &c);
        assert_eq!(r.for_item(0), &[1, 0]);
        assert_eq!(r.for_item(1), &[0, 1]);
    }

    #[test]
    fn adjusted_rule_is_strict() {
        let col = [4.0, 2.0];
        let c = CostColumn::new(&col, 1).unwrap();
        let rule = PriorityRule::AdjustedVariableCost { adjustment: Adjustment::Eta(2.0) };
        assert_eq!(rule.rank(&[0.0, 0.0], &c).for_item(0), &[0, 1]);
        let col = [4.0, 1.999];
        let c = CostColumn::new(&col, 1).unwrap();
        assert_eq!(rule.rank(&[0.0, 0.0], &c).for_item(0), &[1, 0]);
    }

    #[test]
    fn explicit_rankings_are_validated() {
        let bad = PriorityRule::Explicit { order: vec![vec![0, 0]] };
        assert!(bad.validate(2, 1).is_err());
        let good = PriorityRule::Explicit { order: vec![vec![1, 0]] };
        assert!(good.validate(2, 3).is_ok());
    }
}
