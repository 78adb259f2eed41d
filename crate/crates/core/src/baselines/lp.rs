//! Time-aggregate LP relaxation over order types.

use std::time::Duration;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use super::OrderTypeDistribution;
use crate::error::{config, Error, Result};
use crate::model::CostColumn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cmp {
    Eq,
    Le,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpConstraint {
    pub terms: Vec<(usize, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// Variables `x[q][pos][k]` (share of item `types[q][pos]` served by DC `k`)
/// followed by `y[q][k]` (DC `k` used for type `q`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateLp {
    pub dcs: usize,
    pub horizon: usize,
    pub types: Vec<Vec<usize>>,
    pub probabilities: Vec<f64>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<LpConstraint>,
    x_offsets: Vec<usize>,
    y_offset: usize,
}

impl AggregateLp {
    pub fn x(&self, q: usize, pos: usize, k: usize) -> usize {
        self.x_offsets[q] + pos * self.dcs + k
    }

    pub fn y(&self, q: usize, k: usize) -> usize {
        self.y_offset + q * self.dcs + k
    }

    pub fn num_x(&self) -> usize {
        self.y_offset
    }

    pub fn num_y(&self) -> usize {
        self.objective.len() - self.y_offset
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Stable 64-bit FNV-1a digest of the program, for caching solutions.
    pub fn cache_key(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(&(self.dcs as u64).to_le_bytes());
        eat(&(self.horizon as u64).to_le_bytes());
        for v in self.objective.iter().chain(&self.lower).chain(&self.upper) {
            eat(&v.to_bits().to_le_bytes());
        }
        for c in &self.constraints {
            for &(j, a) in &c.terms {
                eat(&(j as u64).to_le_bytes());
                eat(&a.to_bits().to_le_bytes());
            }
            eat(&[c.cmp as u8]);
            eat(&c.rhs.to_bits().to_le_bytes());
        }
        h
    }
}

/// Builds the LP from one cost column; the regime must make that column
/// representative of every period.
pub fn build_aggregate_lp(
    dist: &OrderTypeDistribution,
    fixed_costs: &[f64],
    costs: &CostColumn<'_>,
    inventory: &[i64],
    horizon: usize,
) -> Result<AggregateLp> {
    let dcs = fixed_costs.len();
    let n = costs.items();
    if costs.dcs() != dcs {
        return Err(Error::Structural(format!("cost column has {} DCs, expected {dcs}", costs.dcs())));
    }
    if inventory.len() != (dcs - 1) * n {
        return Err(Error::Structural(format!("inventory has {} entries, expected {}", inventory.len(), (dcs - 1) * n)));
    }
    if dist.types.iter().any(|q| q.windows(2).any(|w| w[0] >= w[1])) {
        return Err(Error::Unsupported("order types must be sets of distinct items (binary demand)".into()));
    }
    dist.validate(n)?;
    if horizon == 0 {
        return Err(config("horizon must be positive"));
    }
    let t = horizon as f64;
    let mut x_offsets = Vec::with_capacity(dist.types.len());
    let mut objective = Vec::new();
    for (q, items) in dist.types.iter().enumerate() {
        x_offsets.push(objective.len());
        let w = t * dist.probabilities[q];
        for &i in items {
            objective.extend((0..dcs).map(|k| w * costs.get(k, i)));
        }
    }
    let y_offset = objective.len();
    for &lambda in &dist.probabilities {
        objective.extend(fixed_costs.iter().map(|&f| t * lambda * f));
    }
    let nv = objective.len();
    let mut lp = AggregateLp {
        dcs,
        horizon,
        types: dist.types.clone(),
        probabilities: dist.probabilities.clone(),
        objective,
        lower: vec![0.0; nv],
        upper: vec![1.0; nv],
        constraints: Vec::new(),
        x_offsets,
        y_offset,
    };

    // inventory caps, one per stocked (FDC, item) pair that appears in some type
    let mut cap_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); (dcs - 1) * n];
    for (q, items) in dist.types.iter().enumerate() {
        let w = t * dist.probabilities[q];
        for (pos, &i) in items.iter().enumerate() {
            for k in 1..dcs {
                cap_terms[(k - 1) * n + i].push((lp.x(q, pos, k), w));
            }
        }
    }
    let mut constraints = Vec::new();
    for (idx, terms) in cap_terms.into_iter().enumerate() {
        if !terms.is_empty() {
            constraints.push(LpConstraint { terms, cmp: Cmp::Le, rhs: inventory[idx] as f64 });
        }
    }
    for (q, items) in dist.types.iter().enumerate() {
        for pos in 0..items.len() {
            constraints.push(LpConstraint {
                terms: (0..dcs).map(|k| (lp.x(q, pos, k), 1.0)).collect(),
                cmp: Cmp::Eq,
                rhs: 1.0,
            });
            for k in 0..dcs {
                constraints.push(LpConstraint {
                    terms: vec![(lp.y(q, k), 1.0), (lp.x(q, pos, k), -1.0)],
                    cmp: Cmp::Ge,
                    rhs: 0.0,
                });
            }
        }
    }
    lp.constraints = constraints;
    Ok(lp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Largest violation of any constraint or variable bound.
    pub max_residual: f64,
    /// Relative gap between the solver's objective and `c . values`.
    pub objective_gap: f64,
    pub iterations: u64,
}

impl LpSolution {
    fn without_values(status: LpStatus) -> Self {
        LpSolution {
            status,
            values: Vec::new(),
            objective: f64::NAN,
            max_residual: f64::NAN,
            objective_gap: f64::NAN,
            iterations: 0,
        }
    }
}

pub fn residual(lp: &AggregateLp, values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, &v) in values.iter().enumerate() {
        worst = worst.max(lp.lower[j] - v).max(v - lp.upper[j]);
    }
    for c in &lp.constraints {
        let lhs: f64 = c.terms.iter().map(|&(j, a)| a * values[j]).sum();
        let r = match c.cmp {
            Cmp::Eq => (lhs - c.rhs).abs(),
            Cmp::Le => lhs - c.rhs,
            Cmp::Ge => c.rhs - lhs,
        };
        worst = worst.max(r);
    }
    worst
}

/// Solves with a sparse simplex. Reaching `time_limit` is an error carrying
/// the pivot count reached.
pub fn solve_lp(lp: &AggregateLp, time_limit: Option<Duration>) -> Result<LpSolution> {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> =
        (0..lp.num_vars()).map(|j| problem.add_var(lp.objective[j], (lp.lower[j], lp.upper[j]))).collect();
    for c in &lp.constraints {
        let expr: Vec<_> = c.terms.iter().map(|&(j, a)| (vars[j], a)).collect();
        let op = match c.cmp {
            Cmp::Eq => ComparisonOp::Eq,
            Cmp::Le => ComparisonOp::Le,
            Cmp::Ge => ComparisonOp::Ge,
        };
        problem.add_constraint(expr, op, c.rhs);
    }
    if let Some(limit) = time_limit {
        problem.set_time_limit(limit);
    }
    let outcome = match problem.solve() {
        Ok(o) => o,
        Err(microlp::Error::Infeasible) => return Ok(LpSolution::without_values(LpStatus::Infeasible)),
        Err(microlp::Error::Unbounded) => return Ok(LpSolution::without_values(LpStatus::Unbounded)),
        Err(e) => return Err(Error::Lp(e.to_string())),
    };
    let iterations = outcome.stats().lp_iterations;
    if !outcome.is_optimal() {
        return Err(Error::Lp(format!("iteration limit: stopped after {iterations} pivots without an optimal basis")));
    }
    let solution = outcome.solution().expect("optimal outcome has a solution");
    let values: Vec<f64> = vars.iter().map(|&v| solution.var_value(v)).collect();
    let objective = solution.objective();
    let recomputed: f64 = values.iter().zip(&lp.objective).map(|(v, c)| v * c).sum();
    let objective_gap = (objective - recomputed).abs() / objective.abs().max(1.0);
    let max_residual = residual(lp, &values);
    Ok(LpSolution { status: LpStatus::Optimal, values, objective, max_residual, objective_gap, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_lp() -> AggregateLp {
        let dist = OrderTypeDistribution { types: vec![vec![0]], probabilities: vec![1.0] };
        let col = [5.0, 1.0];
        build_aggregate_lp(&dist, &[10.0, 1.0], &CostColumn::new(&col, 1).unwrap(), &[1], 2).unwrap()
    }

    #[test]
    fn hand_lp_shape_and_value() {
        let lp = hand_lp();
        assert_eq!((lp.num_x(), lp.num_y()), (2, 2));
        let sol = solve_lp(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 17.0).abs() < 1e-6, "{}", sol.objective);
        assert!((sol.values[lp.x(0, 0, 1)] - 0.5).abs() < 1e-7);
        assert!(sol.max_residual <= 1e-7);
        assert!(sol.objective_gap <= 1e-7);
    }

    #[test]
    fn forced_zero_is_infeasible() {
        let mut lp = hand_lp();
        for k in 0..2 {
            let j = lp.x(0, 0, k);
            lp.upper[j] = 0.0;
        }
        assert_eq!(solve_lp(&lp, None).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn ample_inventory_puts_everything_on_the_fdc() {
        let dist = OrderTypeDistribution { types: vec![vec![0, 1], vec![1]], probabilities: vec![0.5, 0.5] };
        let col = [9.0, 9.0, 1.0, 1.0];
        let lp = build_aggregate_lp(&dist, &[20.0, 1.0], &CostColumn::new(&col, 2).unwrap(), &[100, 100], 4).unwrap();
        let sol = solve_lp(&lp, None).unwrap();
        for q in 0..2 {
            for pos in 0..dist.types[q].len() {
                assert!((sol.values[lp.x(q, pos, 1)] - 1.0).abs() < 1e-9);
            }
            assert!((sol.values[lp.y(q, 1)] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_probability_type_still_sums_to_one() {
        let dist = OrderTypeDistribution { types: vec![vec![0], vec![1]], probabilities: vec![1.0, 0.0] };
        let col = [3.0, 3.0, 1.0, 1.0];
        let lp = build_aggregate_lp(&dist, &[5.0, 1.0], &CostColumn::new(&col, 2).unwrap(), &[1, 1], 3).unwrap();
        let sol = solve_lp(&lp, None).unwrap();
        let total: f64 = (0..2).map(|k| sol.values[lp.x(1, 0, k)]).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(sol.max_residual <= 1e-7);
    }

    #[test]
    fn cache_key_is_stable_and_sensitive() {
        let lp = hand_lp();
        assert_eq!(lp.cache_key(), hand_lp().cache_key());
        let mut other = hand_lp();
        other.constraints[0].rhs = 2.0;
        assert_ne!(lp.cache_key(), other.cache_key());
    }
}
