//! Exact offline optimum by memoized search over `(period, inventory)`.
//!
//! Inventory vectors are packed into a `u128`, each FDC entry taking just
//! enough bits for its initial level. A period's transitions are the cartesian
//! product over ordered items of every feasible split of that item's demand.

use std::collections::HashMap;
use std::time::Instant;

use super::{OptMethod, OptResult, SearchStats};
use crate::error::{Error, Result};
use crate::model::{FulfillmentPlan, Instance, Shipment};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchLimits {
    /// Memoized states allowed before refusing.
    pub max_states: u64,
    /// Fraction of cache hits re-expanded to confirm the cached value.
    pub verify_fraction: f64,
    pub want_plan: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_states: 10_000_000, verify_fraction: 0.01, want_plan: true }
    }
}

/// One way to split one item's demand across DCs.
struct Split {
    mask: u64,
    var: f64,
    delta: u128,
    /// `(dc, quantity)`, RDC last if present.
    lines: Vec<(usize, i64)>,
}

struct Layout {
    offsets: Vec<u32>,
    masks: Vec<u128>,
}

impl Layout {
    fn new(inst: &Instance) -> Result<Self> {
        let mut offsets = Vec::with_capacity(inst.initial_inventory.len());
        let mut masks = Vec::with_capacity(inst.initial_inventory.len());
        let mut used = 0u32;
        for &level in &inst.initial_inventory {
            let bits = 64 - (level.max(0) as u64).leading_zeros();
            offsets.push(used);
            masks.push(if bits == 0 { 0 } else { (1u128 << bits) - 1 });
            used += bits;
            if used > 128 {
                return Err(Error::Unsupported(format!(
                    "inventory needs more than 128 bits to pack ({} entries)",
                    inst.initial_inventory.len()
                )));
            }
        }
        Ok(Layout { offsets, masks })
    }

    fn pack(&self, levels: &[i64]) -> u128 {
        levels.iter().zip(&self.offsets).fold(0u128, |key, (&q, &off)| key | ((q as u128) << off))
    }

    #[inline]
    fn level(&self, key: u128, entry: usize) -> i64 {
        ((key >> self.offsets[entry]) & self.masks[entry]) as i64
    }
}

struct Search<'a> {
    inst: &'a Instance,
    layout: Layout,
    memo: Vec<HashMap<u128, f64>>,
    limits: SearchLimits,
    stats: SearchStats,
    verify_every: u64,
}

impl<'a> Search<'a> {
    fn splits(&self, t: usize, key: u128) -> Vec<Vec<Split>> {
        let inst = self.inst;
        let order = inst.order(t);
        let costs = inst.cost_column(t);
        let mut per_item = Vec::new();
        for (i, &demand) in order.iter().enumerate() {
            if demand <= 0 {
                continue;
            }
            let fdcs: Vec<(usize, i64)> = (1..=inst.k)
                .map(|k| (k, self.layout.level(key, (k - 1) * inst.n + i).min(demand)))
                .filter(|&(_, cap)| cap > 0)
                .collect();
            let mut out = Vec::new();
            let mut qty = vec![0i64; fdcs.len()];
            loop {
                let shipped: i64 = qty.iter().sum();
                if shipped <= demand {
                    let mut split = Split { mask: 0, var: 0.0, delta: 0, lines: Vec::new() };
                    for (&(k, _), &q) in fdcs.iter().zip(&qty) {
                        if q > 0 {
                            split.mask |= 1 << k;
                            split.var += costs.get(k, i) * q as f64;
                            split.delta += (q as u128) << self.layout.offsets[(k - 1) * inst.n + i];
                            split.lines.push((k, q));
                        }
                    }
                    let rest = demand - shipped;
                    if rest > 0 {
                        split.mask |= 1;
                        split.var += costs.get(0, i) * rest as f64;
                        split.lines.push((0, rest));
                    }
                    out.push(split);
                }
                // odometer over per-FDC quantities
                let mut j = 0;
                while j < qty.len() {
                    if qty[j] < fdcs[j].1 {
                        qty[j] += 1;
                        break;
                    }
                    qty[j] = 0;
                    j += 1;
                }
                if j == qty.len() {
                    break;
                }
            }
            per_item.push(out);
        }
        per_item
    }

    fn fixed(&self, mask: u64) -> f64 {
        let mut total = 0.0;
        let mut m = mask;
        while m != 0 {
            let k = m.trailing_zeros() as usize;
            total += self.inst.fixed_costs[k];
            m &= m - 1;
        }
        total
    }

    /// Visits every combination of per-item splits, returning the first
    /// minimizing choice and its cost.
    fn best(&mut self, t: usize, key: u128, splits: &[Vec<Split>]) -> Result<(f64, Vec<usize>)> {
        let mut idx = vec![0usize; splits.len()];
        let mut best = (f64::INFINITY, idx.clone());
        loop {
            let (mut mask, mut var, mut delta) = (0u64, 0.0, 0u128);
            for (opts, &j) in splits.iter().zip(&idx) {
                let s = &opts[j];
                mask |= s.mask;
                var += s.var;
                delta += s.delta;
            }
            self.stats.transitions += 1;
            if self.stats.transitions > self.limits.max_states.saturating_mul(100) {
                return Err(Error::StateSpace { limit: self.limits.max_states });
            }
            let cost = self.fixed(mask) + var + self.value(t + 1, key - delta)?;
            if cost < best.0 {
                best = (cost, idx.clone());
            }
            let mut j = 0;
            while j < idx.len() {
                idx[j] += 1;
                if idx[j] < splits[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == idx.len() {
                return Ok(best);
            }
        }
    }

    fn value(&mut self, t: usize, key: u128) -> Result<f64> {
        if t == self.inst.horizon {
            return Ok(0.0);
        }
        if let Some(&v) = self.memo[t].get(&key) {
            self.stats.cache_hits += 1;
            if self.verify_every > 0 && self.stats.cache_hits % self.verify_every == 0 {
                self.stats.cache_checks += 1;
                let splits = self.splits(t, key);
                let (again, _) = self.best(t, key, &splits)?;
                if again.to_bits() != v.to_bits() {
                    return Err(Error::Invariant(format!(
                        "memoized value {v} at period {t} disagrees with re-expansion {again}"
                    )));
                }
            }
            return Ok(v);
        }
        let splits = self.splits(t, key);
        let (v, _) = self.best(t, key, &splits)?;
        self.memo[t].insert(key, v);
        self.stats.states_expanded += 1;
        if self.stats.states_expanded > self.limits.max_states {
            return Err(Error::StateSpace { limit: self.limits.max_states });
        }
        Ok(v)
    }
}

/// Exact minimum total cost over all feasible plan sequences.
///
/// Refuses with [`Error::StateSpace`] once more than `max_states` states are
/// memoized, and with [`Error::Unsupported`] if the inventory cannot be packed.
pub fn bruteforce_opt(inst: &Instance, limits: &SearchLimits) -> Result<OptResult> {
    inst.check_dimensions()?;
    if inst.k >= 63 {
        return Err(Error::Unsupported(format!("{} FDCs is beyond exhaustive search", inst.k)));
    }
    let started = Instant::now();
    let layout = Layout::new(inst)?;
    let root = layout.pack(&inst.initial_inventory);
    let verify_every = if limits.verify_fraction > 0.0 { (1.0 / limits.verify_fraction).round().max(1.0) as u64 } else { 0 };
    let mut search = Search {
        inst,
        layout,
        memo: vec![HashMap::new(); inst.horizon],
        limits: *limits,
        stats: SearchStats::default(),
        verify_every,
    };
    let opt_cost = search.value(0, root)?;
    let opt_plan = if limits.want_plan {
        let mut plans = Vec::with_capacity(inst.horizon);
        let mut key = root;
        for t in 0..inst.horizon {
            let splits = search.splits(t, key);
            let (_, choice) = search.best(t, key, &splits)?;
            let mut lines = Vec::new();
            for (item_splits, (&j, item)) in
                splits.iter().zip(choice.iter().zip(inst.order(t).iter().enumerate().filter(|(_, &q)| q > 0).map(|(i, _)| i)))
            {
                let s = &item_splits[j];
                key -= s.delta;
                lines.extend(s.lines.iter().map(|&(dc, quantity)| Shipment { dc, item, quantity }));
            }
            plans.push(FulfillmentPlan::from_lines(inst.dcs(), inst.n, lines)?);
        }
        Some(plans)
    } else {
        None
    };
    search.stats.elapsed = started.elapsed().as_secs_f64();
    Ok(OptResult { opt_cost, opt_plan, method: OptMethod::BruteForce, stats: search.stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{period_cost, CostRegime};

    fn greedy_trap(m: usize) -> Instance {
        let horizon = m + 1;
        let mut orders = vec![1i64; horizon];
        orders[0] = m as i64;
        let c = 1.0 / m as f64;
        Instance::new(1, 1, horizon, vec![1.0, 0.0], vec![c; 2 * horizon], vec![m as i64], orders, CostRegime::TimeInvariant, None)
            .unwrap()
    }

    #[test]
    fn greedy_trap_optimum_is_three() {
        for m in [2, 5, 10] {
            let r = bruteforce_opt(&greedy_trap(m), &SearchLimits::default()).unwrap();
            assert!((r.opt_cost - 3.0).abs() < 1e-12, "M = {m}: {}", r.opt_cost);
        }
    }

    #[test]
    fn plan_reproduces_cost() {
        let inst = greedy_trap(4);
        let r = bruteforce_opt(&inst, &SearchLimits::default()).unwrap();
        let plans = r.opt_plan.unwrap();
        let mut state = inst.initial_state();
        let mut total = 0.0;
        for (t, p) in plans.iter().enumerate() {
            state.apply(p, inst.order(t)).unwrap();
            total += period_cost(p, &inst.fixed_costs, &inst.cost_column(t)).unwrap();
        }
        assert_eq!(total, r.opt_cost);
    }

    #[test]
    fn zero_orders_cost_nothing() {
        let inst = Instance::new(2, 1, 3, vec![1.0, 1.0], vec![1.0; 12], vec![1, 1], vec![0; 6], CostRegime::TimeVarying, None)
            .unwrap();
        assert_eq!(bruteforce_opt(&inst, &SearchLimits::default()).unwrap().opt_cost, 0.0);
    }

    #[test]
    fn refuses_large_searches() {
        let mut inst = greedy_trap(10);
        inst.initial_inventory = vec![10];
        let limits = SearchLimits { max_states: 3, ..Default::default() };
        assert!(matches!(bruteforce_opt(&inst, &limits), Err(Error::StateSpace { limit: 3 })));
    }

    #[test]
    fn every_cache_hit_can_be_verified() {
        let limits = SearchLimits { verify_fraction: 1.0, ..Default::default() };
        let r = bruteforce_opt(&greedy_trap(6), &limits).unwrap();
        assert!(r.stats.cache_checks > 0);
        assert_eq!(r.stats.cache_checks, r.stats.cache_hits);
    }
}
