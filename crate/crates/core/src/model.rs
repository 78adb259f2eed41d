//! Instances, plans, inventory and cost accounting.
//!
//! DC index 0 is the RDC, indices `1..=K` are FDCs. Periods are zero-based
//! internally. Variable costs are stored period-major, so the column seen by a
//! policy at period `t` is one contiguous `(K+1) * n` slice.

use serde::{Deserialize, Serialize};

use crate::baselines::OrderTypeDistribution;
use crate::error::{Error, PlanViolation, Result};
use crate::oracle::OptMethod;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostRegime {
    TimeVarying,
    TimeInvariant,
}

/// Declared range `[a, b]` of every variable cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostBounds {
    pub a: f64,
    pub b: f64,
}

/// Variable costs of one period, `(K+1) x n`.
#[derive(Clone, Copy, Debug)]
pub struct CostColumn<'a> {
    values: &'a [f64],
    n: usize,
}

impl<'a> CostColumn<'a> {
    pub fn new(values: &'a [f64], n: usize) -> Result<Self> {
        if n == 0 || values.len() % n != 0 {
            return Err(Error::Structural(format!(
                "cost column of length {} is not a multiple of n = {n}",
                values.len()
            )));
        }
        Ok(CostColumn { values, n })
    }

    #[inline]
    pub fn get(&self, dc: usize, item: usize) -> f64 {
        self.values[dc * self.n + item]
    }

    /// Costs of every item at one DC.
    pub fn dc(&self, dc: usize) -> &'a [f64] {
        &self.values[dc * self.n..(dc + 1) * self.n]
    }

    pub fn dcs(&self) -> usize {
        self.values.len() / self.n
    }

    pub fn items(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub name: String,
    pub value: f64,
    pub method: OptMethod,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    #[serde(default)]
    pub family: String,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_types: Option<OrderTypeDistribution>,
}

impl InstanceMeta {
    pub fn family(name: &str) -> Self {
        InstanceMeta { family: name.to_string(), ..Default::default() }
    }

    pub fn opt_annotation(&self) -> Option<&Annotation> {
        self.annotations.iter().find(|a| a.name == "opt")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub n: usize,
    pub k: usize,
    pub horizon: usize,
    /// `f_0..f_K`.
    pub fixed_costs: Vec<f64>,
    /// Flat `[t][k][i]`.
    pub costs: Vec<f64>,
    /// Flat `[k-1][i]` for FDCs `1..=K`.
    pub initial_inventory: Vec<i64>,
    /// Flat `[t][i]`.
    pub orders: Vec<i64>,
    pub cost_bounds: Option<CostBounds>,
    pub regime: CostRegime,
    pub meta: InstanceMeta,
}

impl Instance {
    /// Builds an instance after checking that every buffer has the right length.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        k: usize,
        horizon: usize,
        fixed_costs: Vec<f64>,
        costs: Vec<f64>,
        initial_inventory: Vec<i64>,
        orders: Vec<i64>,
        regime: CostRegime,
        cost_bounds: Option<CostBounds>,
    ) -> Result<Self> {
        let inst = Instance {
            n,
            k,
            horizon,
            fixed_costs,
            costs,
            initial_inventory,
            orders,
            cost_bounds,
            regime,
            meta: InstanceMeta::default(),
        };
        inst.check_dimensions()?;
        Ok(inst)
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn dcs(&self) -> usize {
        self.k + 1
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let d = self.k + 1;
        let checks = [
            ("fixed_costs", self.fixed_costs.len(), d),
            ("costs", self.costs.len(), self.horizon * d * self.n),
            ("inventory", self.initial_inventory.len(), self.k * self.n),
            ("orders", self.orders.len(), self.horizon * self.n),
        ];
        if self.n == 0 || self.horizon == 0 {
            return Err(Error::Structural("n and T must be positive".into()));
        }
        for (name, got, want) in checks {
            if got != want {
                return Err(Error::Structural(format!("{name} has {got} entries, expected {want}")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn cost(&self, dc: usize, period: usize, item: usize) -> f64 {
        self.costs[(period * (self.k + 1) + dc) * self.n + item]
    }

    pub fn cost_column(&self, period: usize) -> CostColumn<'_> {
        let w = (self.k + 1) * self.n;
        CostColumn { values: &self.costs[period * w..(period + 1) * w], n: self.n }
    }

    pub fn order(&self, period: usize) -> &[i64] {
        &self.orders[period * self.n..(period + 1) * self.n]
    }

    pub fn inventory0(&self, fdc: usize, item: usize) -> i64 {
        self.initial_inventory[(fdc - 1) * self.n + item]
    }

    pub fn initial_state(&self) -> InventoryState {
        InventoryState::new(self.k, self.n, self.initial_inventory.clone())
    }

    pub fn total_units(&self) -> i64 {
        self.orders.iter().sum()
    }

    pub fn min_fdc_fixed_cost(&self) -> Option<f64> {
        self.fixed_costs[1..].iter().copied().reduce(f64::min)
    }

    /// Keeps the first `periods` periods.
    pub fn truncated(&self, periods: usize) -> Instance {
        let t = periods.min(self.horizon).max(1);
        let w = (self.k + 1) * self.n;
        let mut out = self.clone();
        out.horizon = t;
        out.costs.truncate(t * w);
        out.orders.truncate(t * self.n);
        out
    }
}

/// Remaining FDC inventory `I_{k,t}^i` for `k in 1..=K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventoryState {
    fdcs: usize,
    n: usize,
    levels: Vec<i64>,
    period: usize,
}

impl InventoryState {
    pub fn new(fdcs: usize, n: usize, levels: Vec<i64>) -> Self {
        assert_eq!(levels.len(), fdcs * n, "inventory dimension");
        InventoryState { fdcs, n, levels, period: 0 }
    }

    /// Level of an FDC (`fdc >= 1`).
    #[inline]
    pub fn level(&self, fdc: usize, item: usize) -> i64 {
        self.levels[(fdc - 1) * self.n + item]
    }

    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    pub fn fdcs(&self) -> usize {
        self.fdcs
    }

    pub fn items(&self) -> usize {
        self.n
    }

    /// Number of plans applied so far.
    pub fn period(&self) -> usize {
        self.period
    }

    /// Rows per FDC, for wire output.
    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        if self.n == 0 {
            return vec![Vec::new(); self.fdcs];
        }
        self.levels.chunks(self.n).map(|c| c.to_vec()).collect()
    }

    /// Checks the three feasibility constraints of `plan` against this state.
    pub fn check(&self, plan: &FulfillmentPlan, order: &[i64]) -> Result<()> {
        if plan.dcs != self.fdcs + 1 || plan.items != self.n || order.len() != self.n {
            return Err(Error::Structural(format!(
                "plan {}x{}, order {}, inventory for {} FDCs and {} items",
                plan.dcs,
                plan.items,
                order.len(),
                self.fdcs,
                self.n
            )));
        }
        let mut shipped = vec![0i64; self.n];
        for s in &plan.lines {
            if s.quantity < 0 {
                return Err(Error::InfeasiblePlan(PlanViolation::Negative {
                    dc: s.dc,
                    item: s.item,
                    quantity: s.quantity,
                }));
            }
            if s.dc >= 1 {
                let available = self.level(s.dc, s.item);
                if s.quantity > available {
                    return Err(Error::InfeasiblePlan(PlanViolation::Inventory {
                        dc: s.dc,
                        item: s.item,
                        shipped: s.quantity,
                        available,
                    }));
                }
            }
            shipped[s.item] += s.quantity;
        }
        for (item, (&got, &want)) in shipped.iter().zip(order).enumerate() {
            if got != want {
                return Err(Error::InfeasiblePlan(PlanViolation::Demand { item, shipped: got, ordered: want }));
            }
        }
        Ok(())
    }

    /// Validates and applies a plan in place; on error the state is untouched.
    pub fn apply(&mut self, plan: &FulfillmentPlan, order: &[i64]) -> Result<()> {
        self.check(plan, order)?;
        for s in &plan.lines {
            if s.dc >= 1 {
                self.levels[(s.dc - 1) * self.n + s.item] -= s.quantity;
            }
        }
        self.period += 1;
        Ok(())
    }
}

/// Returns the state after shipping `plan` for `order`.
pub fn apply_plan(state: &InventoryState, plan: &FulfillmentPlan, order: &[i64]) -> Result<InventoryState> {
    let mut next = state.clone();
    next.apply(plan, order)?;
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shipment {
    pub dc: usize,
    pub item: usize,
    pub quantity: i64,
}

/// Per-period allocation `m_k^i`, stored sparsely: nonzero entries sorted by
/// `(dc, item)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FulfillmentPlan {
    dcs: usize,
    items: usize,
    lines: Vec<Shipment>,
}

impl FulfillmentPlan {
    pub fn zero(dcs: usize, items: usize) -> Self {
        FulfillmentPlan { dcs, items, lines: Vec::new() }
    }

    /// Builds a plan from arbitrary entries; duplicates are summed, zeros dropped.
    pub fn from_lines(dcs: usize, items: usize, mut lines: Vec<Shipment>) -> Result<Self> {
        for s in &lines {
            if s.dc >= dcs || s.item >= items {
                return Err(Error::Structural(format!(
                    "shipment ({}, {}) outside a {dcs}x{items} plan",
                    s.dc, s.item
                )));
            }
        }
        lines.sort_by_key(|s| (s.dc, s.item));
        let mut merged: Vec<Shipment> = Vec::with_capacity(lines.len());
        for s in lines {
            match merged.last_mut() {
                Some(last) if last.dc == s.dc && last.item == s.item => last.quantity += s.quantity,
                _ => merged.push(s),
            }
        }
        merged.retain(|s| s.quantity != 0);
        Ok(FulfillmentPlan { dcs, items, lines: merged })
    }

    /// Lines must already be sorted, unique and nonzero.
    pub(crate) fn from_sorted(dcs: usize, items: usize, lines: Vec<Shipment>) -> Self {
        debug_assert!(lines.windows(2).all(|w| (w[0].dc, w[0].item) < (w[1].dc, w[1].item)));
        debug_assert!(lines.iter().all(|s| s.quantity != 0));
        FulfillmentPlan { dcs, items, lines }
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Result<Self> {
        let dcs = rows.len();
        let items = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != items) {
            return Err(Error::Structural("ragged plan matrix".into()));
        }
        let mut lines = Vec::new();
        for (dc, row) in rows.iter().enumerate() {
            for (item, &q) in row.iter().enumerate() {
                if q != 0 {
                    lines.push(Shipment { dc, item, quantity: q });
                }
            }
        }
        Ok(FulfillmentPlan { dcs, items, lines })
    }

    /// Whole order from one DC.
    pub fn single_source(dcs: usize, dc: usize, order: &[i64]) -> Self {
        let lines = order
            .iter()
            .enumerate()
            .filter(|(_, &q)| q != 0)
            .map(|(item, &q)| Shipment { dc, item, quantity: q })
            .collect();
        FulfillmentPlan { dcs, items: order.len(), lines }
    }

    pub fn dcs(&self) -> usize {
        self.dcs
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn lines(&self) -> &[Shipment] {
        &self.lines
    }

    pub fn is_zero(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn quantity(&self, dc: usize, item: usize) -> i64 {
        self.lines
            .binary_search_by_key(&(dc, item), |s| (s.dc, s.item))
            .map_or(0, |idx| self.lines[idx].quantity)
    }

    pub fn dc_total(&self, dc: usize) -> i64 {
        self.lines.iter().filter(|s| s.dc == dc).map(|s| s.quantity).sum()
    }

    /// DCs shipping at least one unit, ascending.
    pub fn active_dcs(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for s in &self.lines {
            if s.quantity > 0 && out.last() != Some(&s.dc) {
                out.push(s.dc);
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut rows = vec![vec![0i64; self.items]; self.dcs];
        for s in &self.lines {
            rows[s.dc][s.item] = s.quantity;
        }
        rows
    }
}

/// `sum_k [ f_k * 1(sum_i m_k^i > 0) + sum_i c_k^i m_k^i ]`.
pub fn period_cost(plan: &FulfillmentPlan, fixed_costs: &[f64], costs: &CostColumn<'_>) -> Result<f64> {
    if plan.dcs != fixed_costs.len() || plan.dcs != costs.dcs() || plan.items != costs.items() {
        return Err(Error::Structural(format!(
            "plan {}x{} against {} fixed costs and a {}x{} cost column",
            plan.dcs,
            plan.items,
            fixed_costs.len(),
            costs.dcs(),
            costs.items()
        )));
    }
    Ok(period_cost_unchecked(plan, fixed_costs, costs))
}

pub(crate) fn period_cost_unchecked(plan: &FulfillmentPlan, fixed_costs: &[f64], costs: &CostColumn<'_>) -> f64 {
    let mut total = 0.0;
    let lines = &plan.lines;
    let mut idx = 0;
    while idx < lines.len() {
        let dc = lines[idx].dc;
        let mut units = 0i64;
        let mut variable = 0.0;
        while idx < lines.len() && lines[idx].dc == dc {
            let s = lines[idx];
            units += s.quantity;
            variable += costs.get(dc, s.item) * s.quantity as f64;
            idx += 1;
        }
        if units > 0 {
            total += fixed_costs[dc];
        }
        total += variable;
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Dimension,
    NonFinite,
    Negative,
    OutOfBounds,
    Regime,
    BadBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// JSON pointer into the instance file layout.
    pub path: String,
    pub kind: ViolationKind,
    pub message: String,
}

fn violation(path: String, kind: ViolationKind, message: impl Into<String>) -> Violation {
    Violation { path, kind, message: message.into() }
}

/// Every broken instance invariant, one entry per offending value.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if let Err(e) = inst.check_dimensions() {
        out.push(violation(String::new(), ViolationKind::Dimension, e.to_string()));
        return out;
    }
    let (n, d) = (inst.n, inst.k + 1);
    for (k, &f) in inst.fixed_costs.iter().enumerate() {
        if !f.is_finite() {
            out.push(violation(format!("/fixed_costs/{k}"), ViolationKind::NonFinite, "fixed cost not finite"));
        } else if f < 0.0 {
            out.push(violation(format!("/fixed_costs/{k}"), ViolationKind::Negative, "negative fixed cost"));
        }
    }
    let bounds = inst.cost_bounds;
    if let Some(cb) = bounds {
        if !(cb.a > 0.0 && cb.a <= cb.b && cb.b.is_finite()) {
            out.push(violation("/cost_bounds".into(), ViolationKind::BadBounds, "need 0 < a <= b < inf"));
        }
    }
    for t in 0..inst.horizon {
        for k in 0..d {
            for i in 0..n {
                let c = inst.cost(k, t, i);
                let path = || format!("/costs/{k}/{t}/{i}");
                if !c.is_finite() {
                    out.push(violation(path(), ViolationKind::NonFinite, "variable cost not finite"));
                    continue;
                }
                if c < 0.0 {
                    out.push(violation(path(), ViolationKind::Negative, "negative variable cost"));
                }
                if let Some(cb) = bounds {
                    if c < cb.a || c > cb.b {
                        out.push(violation(
                            path(),
                            ViolationKind::OutOfBounds,
                            format!("cost {c} outside [{}, {}]", cb.a, cb.b),
                        ));
                    }
                }
                if inst.regime == CostRegime::TimeInvariant && t > 0 && c != inst.cost(k, 0, i) {
                    out.push(violation(
                        path(),
                        ViolationKind::Regime,
                        format!("time-invariant cost changed from {} to {c}", inst.cost(k, 0, i)),
                    ));
                }
            }
        }
    }
    for (idx, &q) in inst.initial_inventory.iter().enumerate() {
        if q < 0 {
            out.push(violation(
                format!("/inventory/{}/{}", idx / n, idx % n),
                ViolationKind::Negative,
                "negative inventory",
            ));
        }
    }
    for (idx, &q) in inst.orders.iter().enumerate() {
        if q < 0 {
            out.push(violation(format!("/orders/{}/{}", idx / n, idx % n), ViolationKind::Negative, "negative order"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(values: &[f64], n: usize) -> CostColumn<'_> {
        CostColumn::new(values, n).unwrap()
    }

    #[test]
    fn rdc_only_cost() {
        let plan = FulfillmentPlan::from_dense(&[vec![2], vec![0]]).unwrap();
        let c = column(&[0.5, 7.0], 1);
        assert_eq!(period_cost(&plan, &[1.0, 3.0], &c).unwrap(), 2.0);
    }

    #[test]
    fn zero_plan_costs_nothing() {
        let plan = FulfillmentPlan::zero(2, 3);
        let c = column(&[1.0; 6], 3);
        assert_eq!(period_cost(&plan, &[5.0, 5.0], &c).unwrap(), 0.0);
    }

    #[test]
    fn fdc_period_of_greedy_trap() {
        let plan = FulfillmentPlan::from_dense(&[vec![0], vec![2]]).unwrap();
        let c = column(&[0.5, 0.5], 1);
        assert_eq!(period_cost(&plan, &[1.0, 0.0], &c).unwrap(), 1.0);
    }

    #[test]
    fn period_cost_dimension_mismatch() {
        let plan = FulfillmentPlan::zero(2, 1);
        let c = column(&[1.0; 3], 1);
        assert!(matches!(period_cost(&plan, &[1.0, 1.0], &c), Err(Error::Structural(_))));
    }

    #[test]
    fn apply_decrements_fdc_only() {
        let state = InventoryState::new(1, 1, vec![3]);
        let plan = FulfillmentPlan::from_dense(&[vec![2], vec![3]]).unwrap();
        let next = apply_plan(&state, &plan, &[5]).unwrap();
        assert_eq!(next.levels(), &[0]);
        assert_eq!(next.period(), 1);
    }

    #[test]
    fn apply_rejects_inventory_overdraw() {
        let state = InventoryState::new(1, 1, vec![3]);
        let plan = FulfillmentPlan::from_dense(&[vec![1], vec![4]]).unwrap();
        match apply_plan(&state, &plan, &[5]) {
            Err(Error::InfeasiblePlan(PlanViolation::Inventory { dc: 1, item: 0, .. })) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn apply_rejects_short_demand() {
        let state = InventoryState::new(1, 1, vec![3]);
        let plan = FulfillmentPlan::from_dense(&[vec![1], vec![3]]).unwrap();
        match apply_plan(&state, &plan, &[5]) {
            Err(Error::InfeasiblePlan(PlanViolation::Demand { item: 0, shipped: 4, ordered: 5 })) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn apply_rejects_negative() {
        let mut state = InventoryState::new(1, 1, vec![3]);
        let plan = FulfillmentPlan::from_dense(&[vec![-1], vec![2]]).unwrap();
        assert!(matches!(
            state.apply(&plan, &[1]),
            Err(Error::InfeasiblePlan(PlanViolation::Negative { dc: 0, .. }))
        ));
        assert_eq!(state.levels(), &[3]);
        assert_eq!(state.period(), 0);
    }

    #[test]
    fn plan_lines_merge_and_sort() {
        let plan = FulfillmentPlan::from_lines(
            3,
            2,
            vec![
                Shipment { dc: 2, item: 0, quantity: 1 },
                Shipment { dc: 0, item: 1, quantity: 2 },
                Shipment { dc: 2, item: 0, quantity: 1 },
                Shipment { dc: 1, item: 1, quantity: 0 },
            ],
        )
        .unwrap();
        assert_eq!(plan.lines().len(), 2);
        assert_eq!(plan.quantity(2, 0), 2);
        assert_eq!(plan.active_dcs(), vec![0, 2]);
        assert_eq!(plan.to_dense(), vec![vec![0, 2], vec![0, 0], vec![2, 0]]);
    }

    fn tiny(regime: CostRegime, bounds: Option<CostBounds>) -> Instance {
        Instance::new(1, 1, 2, vec![1.0, 1.0], vec![2.0, 2.0, 2.0, 2.0], vec![1], vec![1, 1], regime, bounds).unwrap()
    }

    #[test]
    fn valid_instance_has_no_violations() {
        let inst = tiny(CostRegime::TimeInvariant, Some(CostBounds { a: 1.0, b: 3.0 }));
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn bound_violation_is_reported_once() {
        let mut inst = tiny(CostRegime::TimeVarying, Some(CostBounds { a: 1.0, b: 3.0 }));
        inst.costs[0] = 4.0;
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::OutOfBounds);
        assert_eq!(v[0].path, "/costs/0/0/0");
    }

    #[test]
    fn regime_violation_is_reported_once() {
        let mut inst = tiny(CostRegime::TimeInvariant, None);
        // c_{0, second period}
        inst.costs[2] = 2.5;
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Regime);
        assert_eq!(v[0].path, "/costs/0/1/0");
    }
}
