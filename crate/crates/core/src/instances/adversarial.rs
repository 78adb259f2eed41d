//! Hand-built instance families with known optima.
//!
//! Two-member families share a prefix: the second member extends the first,
//! so an online policy cannot tell them apart until the prefix ends.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::model::{Annotation, CostBounds, CostRegime, Instance, InstanceMeta};
use crate::oracle::{OptMethod, OptResult};

fn small_positive() -> f64 {
    1e-2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdversarialParams {
    /// One FDC with `m` units and free activation; a big first order lures
    /// greedy into emptying it before `m` unit orders arrive.
    GreedyTrap { m: usize },
    /// `n` items, one unit each at the cheapest FDC, all variable costs `a`.
    /// Member 0 orders everything at once; member 1 then re-orders each item alone.
    FixedCostPair {
        n: usize,
        f0: f64,
        fdc_fixed_costs: Vec<f64>,
        a: f64,
        #[serde(default)]
        b: Option<f64>,
    },
    /// One item, FDCs 1 and 2 stocked with `units` each; the second period makes
    /// one of the two stocked FDCs expensive.
    VaryingCostPair { units: i64, f0: f64, fdc_fixed_costs: Vec<f64>, a: f64, b: f64 },
    /// Block table of `s` + `K d` items per column over `columns` columns.
    /// FDC 1 stocks everything, FDC `k >= 2` stocks its own row.
    BlockTable {
        s: usize,
        d: usize,
        columns: usize,
        f0: f64,
        fdc_fixed_costs: Vec<f64>,
        c0: f64,
        #[serde(default = "small_positive")]
        c1: f64,
        c2: f64,
    },
    /// One item, one FDC stocked with `units`; the RDC costs `sqrt(ab)` then `b`.
    SqrtCostPair { units: i64, f0: f64, f1: f64, a: f64, b: f64 },
    /// One item, one free-to-ship FDC stocked with `multiple * units`.
    BulkPair {
        multiple: i64,
        units: i64,
        #[serde(default = "small_positive")]
        eps: f64,
        f0: f64,
        f1: f64,
    },
    /// `ceil(sqrt f0)` items stocked once at a free FDC, all variable costs 1;
    /// everything is ordered together, then each item alone.
    Stress { f0: f64 },
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config(format!("{name} must be finite and nonnegative, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config(format!("{name} must be positive, got {v}")))
    }
}

/// Index (1-based) of the cheapest FDC, smallest index on ties.
fn cheapest_fdc(fs: &[f64]) -> usize {
    let mut best = 0;
    for (j, f) in fs.iter().enumerate() {
        if *f < fs[best] {
            best = j;
        }
    }
    best + 1
}

fn stress_items(f0: f64) -> usize {
    (f0.sqrt().ceil() as usize).max(1)
}

/// Builds an instance whose variable costs do not depend on the period.
#[allow(clippy::too_many_arguments)]
fn constant_cost_instance(
    n: usize,
    fixed: Vec<f64>,
    column: Vec<f64>,
    inventory: Vec<i64>,
    orders: Vec<i64>,
    bounds: Option<CostBounds>,
) -> Result<Instance> {
    let k = fixed.len() - 1;
    let horizon = orders.len() / n;
    Instance::new(n, k, horizon, fixed, column.repeat(horizon), inventory, orders, CostRegime::TimeInvariant, bounds)
}

fn bounds_of(values: &[f64]) -> Option<CostBounds> {
    let a = values.iter().copied().fold(f64::INFINITY, f64::min);
    let b = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (a > 0.0).then_some(CostBounds { a, b })
}

impl AdversarialParams {
    pub fn family_id(&self) -> &'static str {
        match self {
            AdversarialParams::GreedyTrap { .. } => "greedy-trap",
            AdversarialParams::FixedCostPair { .. } => "fixed-cost-pair",
            AdversarialParams::VaryingCostPair { .. } => "varying-cost-pair",
            AdversarialParams::BlockTable { .. } => "block-table",
            AdversarialParams::SqrtCostPair { .. } => "sqrt-cost-pair",
            AdversarialParams::BulkPair { .. } => "bulk-pair",
            AdversarialParams::Stress { .. } => "stress",
        }
    }

    pub fn members(&self) -> usize {
        match self {
            AdversarialParams::GreedyTrap { .. } | AdversarialParams::Stress { .. } => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AdversarialParams::GreedyTrap { m } => {
                if *m == 0 {
                    return Err(config("greedy-trap needs m >= 1"));
                }
            }
            AdversarialParams::FixedCostPair { n, f0, fdc_fixed_costs, a, b } => {
                if *n == 0 || fdc_fixed_costs.is_empty() {
                    return Err(config("fixed-cost-pair needs n >= 1 and at least one FDC"));
                }
                nonneg("f0", *f0)?;
                fdc_fixed_costs.iter().try_for_each(|&f| nonneg("FDC fixed cost", f))?;
                positive("a", *a)?;
                if let Some(b) = b {
                    if !(*b >= *a && b.is_finite()) {
                        return Err(config("fixed-cost-pair needs b >= a"));
                    }
                }
            }
            AdversarialParams::VaryingCostPair { units, f0, fdc_fixed_costs, a, b } => {
                if fdc_fixed_costs.len() < 2 {
                    return Err(config("varying-cost-pair needs K >= 2 FDCs"));
                }
                if *units < 1 {
                    return Err(config("varying-cost-pair needs units >= 1"));
                }
                nonneg("f0", *f0)?;
                fdc_fixed_costs.iter().try_for_each(|&f| nonneg("FDC fixed cost", f))?;
                positive("a", *a)?;
                if !(*b >= *a && b.is_finite()) {
                    return Err(config("varying-cost-pair needs b >= a"));
                }
            }
            AdversarialParams::BlockTable { s, d, columns, f0, fdc_fixed_costs, c0, c1, c2 } => {
                if fdc_fixed_costs.is_empty() || *columns == 0 || *s + *d == 0 {
                    return Err(config("block-table needs K >= 1, columns >= 1 and s + d >= 1"));
                }
                nonneg("f0", *f0)?;
                fdc_fixed_costs.iter().try_for_each(|&f| nonneg("FDC fixed cost", f))?;
                if fdc_fixed_costs.iter().any(|&f| f < fdc_fixed_costs[0]) {
                    return Err(config("block-table needs f1 to be the smallest FDC fixed cost"));
                }
                positive("c0", *c0)?;
                positive("c1", *c1)?;
                positive("c2", *c2)?;
            }
            AdversarialParams::SqrtCostPair { units, f0, f1, a, b } => {
                if *units < 1 {
                    return Err(config("sqrt-cost-pair needs units >= 1"));
                }
                nonneg("f0", *f0)?;
                nonneg("f1", *f1)?;
                positive("a", *a)?;
                if !(*b >= *a && b.is_finite()) {
                    return Err(config("sqrt-cost-pair needs b >= a"));
                }
            }
            AdversarialParams::BulkPair { multiple, units, eps, f0, f1 } => {
                if *multiple < 0 || *units < 1 {
                    return Err(config("bulk-pair needs multiple >= 0 and units >= 1"));
                }
                positive("eps", *eps)?;
                nonneg("f0", *f0)?;
                nonneg("f1", *f1)?;
            }
            AdversarialParams::Stress { f0 } => nonneg("f0", *f0)?,
        }
        Ok(())
    }

    fn build(&self, member: usize) -> Result<Instance> {
        match self {
            AdversarialParams::GreedyTrap { m } => {
                let m = *m;
                let mut orders = vec![1i64; m + 1];
                orders[0] = m as i64;
                let c = 1.0 / m as f64;
                constant_cost_instance(1, vec![1.0, 0.0], vec![c, c], vec![m as i64], orders, Some(CostBounds { a: c, b: c }))
            }
            AdversarialParams::FixedCostPair { n, f0, fdc_fixed_costs, a, b } => {
                let (n, k) = (*n, fdc_fixed_costs.len());
                let stocked = cheapest_fdc(fdc_fixed_costs);
                let mut inventory = vec![0i64; k * n];
                inventory[(stocked - 1) * n..stocked * n].fill(1);
                let mut orders = vec![1i64; n];
                if member == 1 {
                    for i in 0..n {
                        let mut single = vec![0i64; n];
                        single[i] = 1;
                        orders.extend(single);
                    }
                }
                let fixed = std::iter::once(*f0).chain(fdc_fixed_costs.iter().copied()).collect();
                let bounds = CostBounds { a: *a, b: b.unwrap_or(*a) };
                constant_cost_instance(n, fixed, vec![*a; (k + 1) * n], inventory, orders, Some(bounds))
            }
            AdversarialParams::VaryingCostPair { units, f0, fdc_fixed_costs, a, b } => {
                let dcs = fdc_fixed_costs.len() + 1;
                let mut inventory = vec![0i64; dcs - 1];
                inventory[0] = *units;
                inventory[1] = *units;
                let mut first = vec![*b; dcs];
                first[1] = *a;
                first[2] = *a;
                let mut second = vec![*b; dcs];
                second[if member == 0 { 2 } else { 1 }] = *a;
                let costs = [first, second].concat();
                let fixed = std::iter::once(*f0).chain(fdc_fixed_costs.iter().copied()).collect();
                Instance::new(
                    1,
                    dcs - 1,
                    2,
                    fixed,
                    costs,
                    inventory,
                    vec![*units, *units],
                    CostRegime::TimeVarying,
                    Some(CostBounds { a: *a, b: *b }),
                )
            }
            AdversarialParams::BlockTable { s, d, columns, f0, fdc_fixed_costs, c0, c1, c2 } => {
                let (s, d, cols, k) = (*s, *d, *columns, fdc_fixed_costs.len());
                let per_col = s + k * d;
                let n = per_col * cols;
                // item layout: column-major, within a column row 1 (s items), rows 2..=K (d each), extra row (d)
                let row_of = |within: usize| if within < s { 1 } else { 2 + (within - s) / d.max(1) };
                let mut inventory = vec![0i64; k * n];
                for j in 0..n {
                    inventory[j] = 1;
                    let row = row_of(j % per_col);
                    if (2..=k).contains(&row) {
                        inventory[(row - 1) * n + j] = 1;
                    }
                }
                let mut orders: Vec<i64> = (0..n).map(|j| i64::from(row_of(j % per_col) <= k)).collect();
                if member == 1 {
                    for col in 0..cols {
                        orders.extend((0..n).map(|j| i64::from(j / per_col == col)));
                    }
                }
                let mut column = vec![*c0; n];
                column.extend(std::iter::repeat(*c1).take(n));
                column.extend(std::iter::repeat(*c2).take(n * (k - 1)));
                let fixed = std::iter::once(*f0).chain(fdc_fixed_costs.iter().copied()).collect();
                let bounds = bounds_of(&[*c0, *c1, *c2]);
                constant_cost_instance(n, fixed, column, inventory, orders, bounds)
            }
            AdversarialParams::SqrtCostPair { units, f0, f1, a, b } => {
                let mid = (a * b).sqrt();
                let mut costs = vec![mid, *a];
                let mut orders = vec![*units];
                if member == 1 {
                    costs.extend([*b, *a]);
                    orders.push(*units);
                }
                Instance::new(
                    1,
                    1,
                    orders.len(),
                    vec![*f0, *f1],
                    costs,
                    vec![*units],
                    orders,
                    CostRegime::TimeVarying,
                    Some(CostBounds { a: *a, b: *b }),
                )
            }
            AdversarialParams::BulkPair { multiple, units, eps, f0, f1 } => {
                let mut orders = vec![*units];
                if member == 1 {
                    orders.push(multiple * units);
                }
                constant_cost_instance(1, vec![*f0, *f1], vec![*eps, 0.0], vec![multiple * units], orders, None)
            }
            AdversarialParams::Stress { f0 } => {
                let n = stress_items(*f0);
                let mut orders = vec![1i64; n];
                for i in 0..n {
                    let mut single = vec![0i64; n];
                    single[i] = 1;
                    orders.extend(single);
                }
                constant_cost_instance(
                    n,
                    vec![*f0, 0.0],
                    vec![1.0; 2 * n],
                    vec![1; n],
                    orders,
                    Some(CostBounds { a: 1.0, b: 1.0 }),
                )
            }
        }
    }
}

/// The family's optimum for one member: exact where the construction pins it
/// down, otherwise the cost of the witness plan as an upper bound.
pub fn analytic_opt(params: &AdversarialParams, member: usize) -> Result<OptResult> {
    params.validate()?;
    if member >= params.members() {
        return Err(config(format!("{} has {} member(s), asked for {member}", params.family_id(), params.members())));
    }
    let (value, exact) = match params {
        AdversarialParams::GreedyTrap { .. } => (3.0, true),
        AdversarialParams::FixedCostPair { n, f0, fdc_fixed_costs, a, .. } => {
            let f = fdc_fixed_costs[cheapest_fdc(fdc_fixed_costs) - 1];
            let na = *n as f64 * a;
            if member == 0 {
                (f.min(*f0) + na, true)
            } else {
                (f0 + *n as f64 * f + 2.0 * na, false)
            }
        }
        AdversarialParams::VaryingCostPair { units, fdc_fixed_costs, a, .. } => {
            (fdc_fixed_costs[0] + fdc_fixed_costs[1] + 2.0 * a * *units as f64, false)
        }
        AdversarialParams::BlockTable { s, d, columns, f0, fdc_fixed_costs, c0, c1, c2 } => {
            let (s, d, n, k) = (*s as f64, *d as f64, *columns as f64, fdc_fixed_costs.len() as f64);
            let f1 = fdc_fixed_costs[0];
            if member == 0 {
                let exact = f1 <= *f0 && c1 <= c0 && c1 <= c2;
                (f1 + (s * n + (k - 1.0) * d * n) * c1, exact)
            } else {
                let rest: f64 = fdc_fixed_costs[1..].iter().sum();
                (f0 + rest + s * n * c0 + d * (k - 1.0) * n * c2 + (f1 + (s + k * d) * c1) * n, false)
            }
        }
        AdversarialParams::SqrtCostPair { units, f0, f1, a, b } => {
            let big_n = *units as f64;
            let mid = (a * b).sqrt();
            if member == 0 {
                ((f1 + a * big_n).min(f0 + mid * big_n), true)
            } else {
                (f0 + f1 + mid * big_n + a * big_n, false)
            }
        }
        AdversarialParams::BulkPair { multiple, units, eps, f0, f1 } => {
            let n_eps = *units as f64 * eps;
            if member == 0 {
                if *multiple >= 1 {
                    (f1.min(f0 + n_eps), true)
                } else {
                    (f0 + n_eps, true)
                }
            } else {
                let exact = *multiple >= 1 && *f1 <= f0 + *multiple as f64 * n_eps;
                (f0 + f1 + n_eps, exact)
            }
        }
        AdversarialParams::Stress { f0 } => (f0 + 2.0 * stress_items(*f0) as f64, true),
    };
    Ok(OptResult::analytic(value, exact))
}

/// Every member of the family, each annotated with its analytic optimum.
pub fn gen_adversarial(params: &AdversarialParams) -> Result<Vec<Instance>> {
    params.validate()?;
    (0..params.members())
        .map(|member| {
            let opt = analytic_opt(params, member)?;
            let mut tagged = serde_json::to_value(params).expect("params serialize");
            tagged["member"] = member.into();
            let meta = InstanceMeta {
                family: params.family_id().to_string(),
                annotations: vec![Annotation { name: "opt".into(), value: opt.opt_cost, method: opt.method }],
                params: Some(tagged),
                order_types: None,
            };
            Ok(params.build(member)?.with_meta(meta))
        })
        .collect()
}

/// Whether an annotation certifies the optimum exactly.
pub fn annotation_is_exact(a: &Annotation) -> bool {
    a.method != OptMethod::AnalyticUpperBound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    #[test]
    fn greedy_trap_shape() {
        let inst = &gen_adversarial(&AdversarialParams::GreedyTrap { m: 3 }).unwrap()[0];
        assert_eq!((inst.horizon, inst.orders.clone(), inst.initial_inventory.clone()), (4, vec![3, 1, 1, 1], vec![3]));
        assert_eq!(inst.fixed_costs, vec![1.0, 0.0]);
        assert!(inst.costs.iter().all(|&c| c == 1.0 / 3.0));
        assert_eq!(inst.meta.opt_annotation().unwrap().value, 3.0);
    }

    #[test]
    fn fixed_cost_pair_annotations() {
        let p = AdversarialParams::FixedCostPair { n: 3, f0: 50.0, fdc_fixed_costs: vec![5.0], a: 8.0, b: None };
        let pair = gen_adversarial(&p).unwrap();
        assert_eq!(pair[0].horizon, 1);
        assert_eq!(pair[0].orders, vec![1, 1, 1]);
        assert_eq!(pair[1].horizon, 4);
        let a0 = pair[0].meta.opt_annotation().unwrap();
        let a1 = pair[1].meta.opt_annotation().unwrap();
        assert_eq!((a0.value, a0.method), (29.0, OptMethod::AnalyticExact));
        assert_eq!((a1.value, a1.method), (113.0, OptMethod::AnalyticUpperBound));
    }

    #[test]
    fn block_table_first_member() {
        let p = AdversarialParams::BlockTable {
            s: 1,
            d: 1,
            columns: 2,
            f0: 50.0,
            fdc_fixed_costs: vec![5.0, 5.0],
            c0: 1.0,
            c1: 0.01,
            c2: 1.0,
        };
        let opt = analytic_opt(&p, 0).unwrap();
        assert!((opt.opt_cost - 5.04).abs() < 1e-12);
        assert_eq!(opt.method, OptMethod::AnalyticExact);
        let pair = gen_adversarial(&p).unwrap();
        // 2 columns of 1 + 2 * 1 items
        assert_eq!(pair[0].n, 6);
        assert_eq!(pair[0].orders.iter().sum::<i64>(), 4);
        assert_eq!(pair[1].horizon, 3);
    }

    #[test]
    fn stress_shape() {
        let inst = &gen_adversarial(&AdversarialParams::Stress { f0: 50.0 }).unwrap()[0];
        assert_eq!((inst.n, inst.horizon, inst.k), (8, 9, 1));
        assert_eq!(&inst.orders[..8], &[1; 8]);
        assert_eq!(inst.order(3).iter().sum::<i64>(), 1);
        assert_eq!(inst.order(3)[2], 1);
    }

    #[test]
    fn every_family_is_valid() {
        let all = [
            AdversarialParams::GreedyTrap { m: 2 },
            AdversarialParams::FixedCostPair { n: 2, f0: 9.0, fdc_fixed_costs: vec![2.0, 1.0], a: 1.0, b: Some(2.0) },
            AdversarialParams::VaryingCostPair { units: 2, f0: 3.0, fdc_fixed_costs: vec![1.0, 1.0, 4.0], a: 1.0, b: 5.0 },
            AdversarialParams::BlockTable { s: 1, d: 1, columns: 1, f0: 4.0, fdc_fixed_costs: vec![1.0, 2.0], c0: 1.0, c1: 0.01, c2: 1.0 },
            AdversarialParams::SqrtCostPair { units: 3, f0: 2.0, f1: 1.0, a: 1.0, b: 4.0 },
            AdversarialParams::BulkPair { multiple: 2, units: 2, eps: 0.01, f0: 1.0, f1: 1.0 },
            AdversarialParams::Stress { f0: 10.0 },
        ];
        for p in all {
            for inst in gen_adversarial(&p).unwrap() {
                assert!(validate_instance(&inst).is_empty(), "{}: {:?}", p.family_id(), validate_instance(&inst));
            }
        }
    }

    #[test]
    fn regime_violations_are_config_errors() {
        let p = AdversarialParams::VaryingCostPair { units: 1, f0: 1.0, fdc_fixed_costs: vec![1.0], a: 1.0, b: 2.0 };
        assert!(matches!(gen_adversarial(&p), Err(crate::error::Error::Config(_))));
        assert!(analytic_opt(&AdversarialParams::GreedyTrap { m: 2 }, 1).is_err());
    }
}
