//! Acceptance suites. Each returns a report with a one-line verdict.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::experiments::{grid_sample, mean, run_experiment, standard_error, ExperimentConfig, ExperimentId};
use super::tiny::{random_feasible_plans, states_along, tiny_instance, TinyShape};
use crate::baselines::{build_aggregate_lp, solve_lp, LpStatus};
use crate::error::{config, Error, Result};
use crate::instances::{analytic_opt, gen_adversarial, gen_stochastic, AdversarialParams, StochasticConfig};
use crate::model::{CostRegime, FulfillmentPlan, Instance};
use crate::oracle::{
    bound_value, bruteforce_opt, competitive_ratio, single_fdc_varying_gap, BoundId, BoundInputs, OptResult,
    SearchLimits,
};
use crate::policy::{greedy_plan, PolicySpec};
use crate::rng::{tag, Stream};
use crate::service::SessionStore;
use crate::sim::run_policy;

/// Slack allowed on closed-form comparisons of floating-point totals.
pub const TOLERANCE: f64 = 1e-9;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    GreedyTrap,
    PrefixDominance,
    OrderSizeFPriorityBound,
    CostComparisonVPriorityBound,
    CostComparisonAdjvPriorityBound,
    RandomizedBound,
    OracleCrossCheck,
    Stress,
    BoundGrids,
    StochasticOrdering,
    LpSanity,
    ServiceEquivalence,
}

impl SuiteId {
    pub const ALL: [SuiteId; 12] = [
        SuiteId::GreedyTrap,
        SuiteId::PrefixDominance,
        SuiteId::OrderSizeFPriorityBound,
        SuiteId::CostComparisonVPriorityBound,
        SuiteId::CostComparisonAdjvPriorityBound,
        SuiteId::RandomizedBound,
        SuiteId::OracleCrossCheck,
        SuiteId::Stress,
        SuiteId::BoundGrids,
        SuiteId::StochasticOrdering,
        SuiteId::LpSanity,
        SuiteId::ServiceEquivalence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteId::GreedyTrap => "greedy-trap",
            SuiteId::PrefixDominance => "prefix-dominance",
            SuiteId::OrderSizeFPriorityBound => "order-size-f-priority-bound",
            SuiteId::CostComparisonVPriorityBound => "cost-comparison-v-priority-bound",
            SuiteId::CostComparisonAdjvPriorityBound => "cost-comparison-adjv-priority-bound",
            SuiteId::RandomizedBound => "randomized-bound",
            SuiteId::OracleCrossCheck => "oracle-cross-check",
            SuiteId::Stress => "stress",
            SuiteId::BoundGrids => "bound-grids",
            SuiteId::StochasticOrdering => "stochastic-ordering",
            SuiteId::LpSanity => "lp-sanity",
            SuiteId::ServiceEquivalence => "service-equivalence",
        }
    }

    /// Wall-clock budget; exceeding it fails the suite.
    pub fn time_limit(self) -> Option<Duration> {
        let secs = match self {
            SuiteId::GreedyTrap => 1,
            SuiteId::PrefixDominance => 120,
            SuiteId::OrderSizeFPriorityBound | SuiteId::CostComparisonVPriorityBound => 300,
            SuiteId::StochasticOrdering => 1800,
            _ => return None,
        };
        Some(Duration::from_secs(secs))
    }
}

impl std::str::FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteId::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| config(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub summary: String,
    /// One entry per failed check, plus notable measurements.
    pub details: Vec<String>,
    pub elapsed_secs: f64,
    pub time_limit_secs: Option<f64>,
    pub metrics: Value,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} ({:.2}s): {}", self.suite, self.elapsed_secs, self.summary)
    }
}

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
    metrics: Value,
}

pub fn run_suite(id: SuiteId, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let outcome = match id {
        SuiteId::GreedyTrap => greedy_trap(),
        SuiteId::PrefixDominance => prefix_dominance(seed),
        SuiteId::OrderSizeFPriorityBound => order_size_f_priority_bound(seed),
        SuiteId::CostComparisonVPriorityBound => cost_comparison_v_priority_bound(seed),
        SuiteId::CostComparisonAdjvPriorityBound => cost_comparison_adjv_priority_bound(seed),
        SuiteId::RandomizedBound => randomized_bound(seed),
        SuiteId::OracleCrossCheck => oracle_cross_check(),
        SuiteId::Stress => stress(),
        SuiteId::BoundGrids => bound_grids(seed),
        SuiteId::StochasticOrdering => stochastic_ordering(seed),
        SuiteId::LpSanity => lp_sanity(seed),
        SuiteId::ServiceEquivalence => service_equivalence(seed),
    };
    let outcome = outcome.unwrap_or_else(|e| Outcome {
        passed: false,
        summary: format!("error: {e}"),
        details: vec![e.to_string()],
        metrics: Value::Null,
    });
    let elapsed = started.elapsed();
    let limit = id.time_limit();
    let mut passed = outcome.passed;
    let mut details = outcome.details;
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            details.push(format!("took {:.1}s, budget {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()));
        }
    }
    SuiteReport {
        suite: id.as_str().to_string(),
        passed,
        summary: outcome.summary,
        details,
        elapsed_secs: elapsed.as_secs_f64(),
        time_limit_secs: limit.map(|l| l.as_secs_f64()),
        metrics: outcome.metrics,
    }
}

fn close(x: f64, target: f64) -> bool {
    (x - target).abs() <= TOLERANCE * target.abs().max(1.0)
}

fn spec(name: &str) -> PolicySpec {
    name.parse().expect("built-in policy name")
}

fn exact_opt(inst: &Instance) -> Result<OptResult> {
    bruteforce_opt(inst, &SearchLimits::default())
}

fn greedy_trap() -> Result<Outcome> {
    let mut details = Vec::new();
    let mut table = Vec::new();
    for m in [2usize, 5, 10] {
        let inst = gen_adversarial(&AdversarialParams::GreedyTrap { m })?.remove(0);
        let greedy = run_policy(&inst, &spec("pure-greedy"), 0)?.total_cost;
        let rdc = run_policy(&inst, &spec("all-rdc"), 0)?.total_cost;
        let opt = exact_opt(&inst)?.opt_cost;
        let m = m as f64;
        for (what, got, want) in [("pure greedy", greedy, m + 2.0), ("all RDC", rdc, m + 3.0), ("optimum", opt, 3.0)] {
            if !close(got, want) {
                details.push(format!("M = {m}: {what} cost {got}, expected {want}"));
            }
        }
        table.push(json!({"m": m, "pure_greedy": greedy, "all_rdc": rdc, "opt": opt}));
    }
    let summary = table
        .iter()
        .map(|r| format!("M={}: ({}, {}, {})", r["m"], r["pure_greedy"], r["all_rdc"], r["opt"]))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome { passed: details.is_empty(), summary, details, metrics: json!(table) })
}

/// Counts violations of the prefix-dominance inequality for one run of a gated
/// greedy policy against each witness plan sequence. `None` if the policy
/// does not apply to the instance.
///
/// For each item, take the periods where the run used an FDC for it; over
/// every superset of those periods and every prefix of FDCs ranked ahead of
/// the RDC, the pure greedy plans must ship at least as many units from the
/// prefix as the witness does.
pub fn prefix_dominance_violations(
    inst: &Instance,
    policy: &PolicySpec,
    seed: u64,
    witnesses: &[Vec<FulfillmentPlan>],
) -> Result<Option<usize>> {
    let cfg = match policy.resolve(&inst.header()) {
        Ok(c) => c,
        Err(Error::Config(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let horizon = inst.horizon;
    if horizon > 16 {
        return Err(Error::Unsupported("prefix check enumerates period subsets; keep T <= 16".into()));
    }
    let run = run_policy(inst, policy, seed)?;
    let plans: Vec<FulfillmentPlan> = run.trace.into_iter().map(|r| r.plan.expect("full trace")).collect();
    let states = states_along(inst, &plans);
    let ranking = cfg.rule.rank(&inst.fixed_costs, &inst.cost_column(0));
    if (1..horizon).any(|t| cfg.rule.rank(&inst.fixed_costs, &inst.cost_column(t)) != ranking) {
        return Err(Error::Unsupported("prefix check needs a ranking that does not change over time".into()));
    }
    let greedy: Vec<FulfillmentPlan> = (0..horizon).map(|t| greedy_plan(inst.order(t), &states[t], &ranking)).collect();
    let mut violations = 0;
    for item in 0..inst.n {
        let order = ranking.for_item(item);
        let k0 = order.iter().position(|&k| k == 0).unwrap_or(order.len());
        if k0 == 0 {
            continue;
        }
        let used: u32 = (0..horizon)
            .filter(|&t| (1..inst.dcs()).any(|k| plans[t].quantity(k, item) > 0))
            .fold(0, |m, t| m | (1 << t));
        let shipped = |seq: &[FulfillmentPlan], mask: u32, j: usize| -> i64 {
            (0..horizon)
                .filter(|t| mask & (1 << t) != 0)
                .map(|t| order[..j].iter().map(|&k| seq[t].quantity(k, item)).sum::<i64>())
                .sum()
        };
        for mask in 0..(1u32 << horizon) {
            if mask & used != used {
                continue;
            }
            for j in 1..=k0 {
                let lhs = shipped(&greedy, mask, j);
                violations += witnesses.iter().filter(|w| shipped(w, mask, j) > lhs).count();
            }
        }
    }
    Ok(Some(violations))
}

const GPG_POLICIES: [&str; 7] = [
    "order-size-f-priority",
    "cost-comparison-v-priority",
    "cost-comparison-adjv-priority",
    "order-size-adjv-priority",
    "randomized-cc-v-priority",
    "better-of-two",
    "pure-greedy",
];

fn prefix_dominance(seed: u64) -> Result<Outcome> {
    let mut rng = Stream::substream(seed, tag::SUITE);
    let shape = TinyShape { regime: CostRegime::TimeInvariant, ..TinyShape::default() };
    let policies: Vec<PolicySpec> = GPG_POLICIES.iter().map(|n| spec(n)).collect();
    let (mut checked, mut violations) = (0usize, 0usize);
    let mut details = Vec::new();
    let instances = 1000;
    for idx in 0..instances {
        // half the draws use one FDC so the single-FDC policies are exercised
        let single = idx % 2 == 0;
        let shape = TinyShape { k_max: if single { 1 } else { shape.k_max }, ..shape.clone() };
        let inst = tiny_instance(&mut rng, &shape);
        let mut witnesses: Vec<_> = (0..100).map(|_| random_feasible_plans(&inst, &mut rng)).collect();
        witnesses.push(exact_opt(&inst)?.opt_plan.expect("oracle returns a plan"));
        for p in &policies {
            if let Some(v) = prefix_dominance_violations(&inst, p, seed.wrapping_add(idx as u64), &witnesses)? {
                checked += 1;
                if v > 0 {
                    violations += v;
                    details.push(format!("instance {idx}, {}: {v} violations", p.name()));
                }
            }
        }
    }
    Ok(Outcome {
        passed: violations == 0,
        summary: format!("{instances} instances, {checked} policy runs, {violations} violations"),
        details,
        metrics: json!({"instances": instances, "policy_runs": checked, "violations": violations}),
    })
}

struct RatioCheck<'a> {
    policy: &'a str,
    shape: TinyShape,
    bound: BoundId,
    /// Passes the policy's threshold into the bound.
    with_theta: bool,
    count: usize,
}

fn ratio_compliance(seed: u64, check: RatioCheck<'_>) -> Result<Outcome> {
    let mut rng = Stream::substream(seed, tag::SUITE);
    let policy = spec(check.policy);
    let (mut worst, mut worst_slack) = (0f64, f64::NEG_INFINITY);
    let mut details = Vec::new();
    for idx in 0..check.count {
        let inst = tiny_instance(&mut rng, &check.shape);
        let cb = inst.cost_bounds.expect("tiny instances declare bounds");
        let mut x = BoundInputs::new(inst.fixed_costs[0], &inst.fixed_costs[1..]).costs(cb.a, cb.b);
        if check.with_theta {
            if let crate::policy::GatingCondition::OrderSize { theta } = policy.resolve(&inst.header())?.gate {
                x = x.theta(theta);
            }
        }
        let bound = bound_value(check.bound, &x)?;
        let alg = run_policy(&inst, &policy, seed.wrapping_add(idx as u64))?.total_cost;
        let ratio = competitive_ratio(alg, &exact_opt(&inst)?)?.value;
        worst = worst.max(ratio);
        worst_slack = worst_slack.max(ratio - bound);
        if ratio > bound + TOLERANCE {
            details.push(format!("instance {idx}: ratio {ratio} exceeds bound {bound}"));
        }
    }
    Ok(Outcome {
        passed: details.is_empty(),
        summary: format!(
            "{} instances, max ratio {worst:.6}, max(ratio - bound) {worst_slack:.6}, {} over",
            check.count,
            details.len()
        ),
        details,
        metrics: json!({"instances": check.count, "max_ratio": worst, "max_ratio_minus_bound": worst_slack}),
    })
}

fn order_size_f_priority_bound(seed: u64) -> Result<Outcome> {
    ratio_compliance(
        seed,
        RatioCheck {
            policy: "order-size-f-priority",
            shape: TinyShape::default(),
            bound: BoundId::OrderSizeFPriorityUpper,
            with_theta: true,
            count: 500,
        },
    )
}

fn cost_comparison_v_priority_bound(seed: u64) -> Result<Outcome> {
    ratio_compliance(
        seed,
        RatioCheck {
            policy: "cost-comparison-v-priority",
            shape: TinyShape { regime: CostRegime::TimeInvariant, ..TinyShape::default() },
            bound: BoundId::CostComparisonVPriorityUpper,
            with_theta: false,
            count: 500,
        },
    )
}

fn cost_comparison_adjv_priority_bound(seed: u64) -> Result<Outcome> {
    ratio_compliance(
        seed,
        RatioCheck {
            policy: "cost-comparison-adjv-priority",
            shape: TinyShape { k_max: 1, ..TinyShape::default() },
            bound: BoundId::CostComparisonAdjvUpper,
            with_theta: false,
            count: 500,
        },
    )
}

fn randomized_bound(seed: u64) -> Result<Outcome> {
    let mut rng = Stream::substream(seed, tag::SUITE);
    let shape = TinyShape { k_max: 1, regime: CostRegime::TimeInvariant, ..TinyShape::default() };
    let policy = spec("randomized-cc-v-priority");
    let (instances, draws) = (50, 10_000);
    let mut details = Vec::new();
    let mut worst_z = f64::NEG_INFINITY;
    for idx in 0..instances {
        let inst = tiny_instance(&mut rng, &shape);
        let bound = bound_value(BoundId::RandomizedCcVUpper, &BoundInputs::new(inst.fixed_costs[0], &inst.fixed_costs[1..]))?;
        let opt = exact_opt(&inst)?;
        let ratios = (0..draws)
            .map(|r| {
                let alg = run_policy(&inst, &policy, seed.wrapping_add((idx * draws + r) as u64))?.total_cost;
                Ok(competitive_ratio(alg, &opt)?.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        let m = mean(&ratios).expect("nonempty");
        let se = standard_error(&ratios).expect("nonempty");
        if se > 0.0 {
            worst_z = worst_z.max((m - bound) / se);
        }
        if m > bound + 3.0 * se + TOLERANCE {
            details.push(format!("instance {idx}: mean ratio {m} (se {se}) exceeds bound {bound}"));
        }
    }
    Ok(Outcome {
        passed: details.is_empty(),
        summary: format!(
            "{instances} instances x {draws} draws, largest (mean - bound) / se = {worst_z:.3}, {} over",
            details.len()
        ),
        details,
        metrics: json!({"instances": instances, "draws": draws, "max_z": worst_z}),
    })
}

/// Family settings small enough for the exhaustive oracle (`n <= 4`, `T <= 5`).
pub fn cross_check_params() -> Vec<AdversarialParams> {
    let mut out = vec![
        AdversarialParams::GreedyTrap { m: 2 },
        AdversarialParams::GreedyTrap { m: 3 },
        AdversarialParams::GreedyTrap { m: 4 },
    ];
    for (n, f0, fs) in [(2, 10.0, vec![3.0, 5.0]), (3, 2.0, vec![4.0]), (4, 6.0, vec![1.0, 2.0])] {
        out.push(AdversarialParams::FixedCostPair { n, f0, fdc_fixed_costs: fs, a: 1.0, b: None });
    }
    for (f0, fs) in [(10.0, vec![2.0, 3.0]), (1.0, vec![4.0, 4.0, 5.0])] {
        out.push(AdversarialParams::VaryingCostPair { units: 3, f0, fdc_fixed_costs: fs, a: 1.0, b: 4.0 });
    }
    for (f0, fs, c0) in [(8.0, vec![2.0, 3.0], 1.0), (1.0, vec![2.0, 3.0], 0.5)] {
        out.push(AdversarialParams::BlockTable { s: 1, d: 1, columns: 1, f0, fdc_fixed_costs: fs, c0, c1: 0.01, c2: 2.0 });
    }
    for (units, f0, f1) in [(4, 10.0, 2.0), (2, 1.0, 6.0)] {
        out.push(AdversarialParams::SqrtCostPair { units, f0, f1, a: 1.0, b: 9.0 });
    }
    for (multiple, f0, f1) in [(2, 5.0, 1.0), (0, 1.0, 2.0), (1, 0.5, 3.0)] {
        out.push(AdversarialParams::BulkPair { multiple, units: 2, eps: 0.01, f0, f1 });
    }
    for f0 in [4.0, 9.0, 16.0] {
        out.push(AdversarialParams::Stress { f0 });
    }
    out
}

fn oracle_cross_check() -> Result<Outcome> {
    let mut details = Vec::new();
    let (mut exact, mut upper) = (0, 0);
    for params in cross_check_params() {
        for (member, inst) in gen_adversarial(&params)?.into_iter().enumerate() {
            if inst.n > 4 || inst.horizon > 5 {
                return Err(config(format!("{} member {member} is too large for the cross-check", params.family_id())));
            }
            let analytic = analytic_opt(&params, member)?;
            let brute = exact_opt(&inst)?.opt_cost;
            if analytic.method.is_exact() {
                exact += 1;
                if analytic.opt_cost != brute && !close(analytic.opt_cost, brute) {
                    details.push(format!(
                        "{} member {member}: analytic {} != exhaustive {brute}",
                        params.family_id(),
                        analytic.opt_cost
                    ));
                }
            } else {
                upper += 1;
                if analytic.opt_cost < brute - TOLERANCE * brute.max(1.0) {
                    details.push(format!(
                        "{} member {member}: upper bound {} < exhaustive {brute}",
                        params.family_id(),
                        analytic.opt_cost
                    ));
                }
            }
        }
    }
    Ok(Outcome {
        passed: details.is_empty(),
        summary: format!("{exact} exact optima and {upper} upper bounds checked, {} mismatches", details.len()),
        details,
        metrics: json!({"exact": exact, "upper_bounds": upper}),
    })
}

fn stress() -> Result<Outcome> {
    let mut details = Vec::new();
    let mut rows = Vec::new();
    let mut last_gap = f64::NEG_INFINITY;
    for step in 1..=10 {
        let f0 = 50.0 * step as f64;
        let inst = gen_adversarial(&AdversarialParams::Stress { f0 })?.remove(0);
        let n = inst.n as f64;
        let myopic = run_policy(&inst, &spec("myopic"), 0)?.total_cost;
        let os_fp = run_policy(&inst, &spec("order-size-f-priority"), 0)?.total_cost;
        let gap = myopic - os_fp;
        if !close(myopic, n * (f0 + 2.0)) {
            details.push(format!("f0 = {f0}: myopic {myopic}, expected n(f0 + 2) = {}", n * (f0 + 2.0)));
        }
        if !close(os_fp, f0 + 2.0 * n) {
            details.push(format!("f0 = {f0}: order-size-f-priority {os_fp}, expected f0 + 2n = {}", f0 + 2.0 * n));
        }
        if !(gap > last_gap) {
            details.push(format!("f0 = {f0}: gap {gap} does not exceed the previous {last_gap}"));
        }
        last_gap = gap;
        rows.push(json!({"f0": f0, "n": n, "myopic": myopic, "order_size_f_priority": os_fp, "gap": gap}));
    }
    Ok(Outcome {
        passed: details.is_empty(),
        summary: format!("10 settings, {} mismatches", details.len()),
        details,
        metrics: json!(rows),
    })
}

fn bound_grids(seed: u64) -> Result<Outcome> {
    let mut rng = Stream::substream(seed, tag::SUITE);
    let samples = 10_000;
    let (mut multi, mut single) = (0f64, 0f64);
    let mut details = Vec::new();
    for _ in 0..samples {
        let (f0, f_min, a, spread) = grid_sample(&mut rng, 1e3);
        let b = a * spread;
        let x2 = BoundInputs::new(f0, &[f_min, f_min]).costs(a, b).relaxed();
        let r = bound_value(BoundId::OrderSizeFPriorityUpper, &x2)? / bound_value(BoundId::MultiFdcVaryingLower, &x2)?;
        multi = multi.max(r);
        let x1 = BoundInputs::new(f0, &[f_min]).costs(a, b).relaxed();
        let s = bound_value(BoundId::BetterOfTwoUpperSimplified, &x1)? / bound_value(BoundId::SingleFdcVaryingLower, &x1)?;
        single = single.max(s);
        if r > 6.473 {
            details.push(format!("multi-FDC ratio {r} at f0={f0}, f_min={f_min}, a={a}, b={b}"));
        }
        if s > 19.828 {
            details.push(format!("single-FDC ratio {s} at f0={f0}, f1={f_min}, a={a}, b={b}"));
        }
    }
    Ok(Outcome {
        passed: details.is_empty(),
        summary: format!(
            "{samples} samples, max multi-FDC ratio {multi:.4} (limit 6.473), max single-FDC ratio {single:.4} (limit 19.828, constant {:.4})",
            single_fdc_varying_gap()
        ),
        details,
        metrics: json!({"samples": samples, "max_multi": multi, "max_single": single}),
    })
}

fn stochastic_ordering(seed: u64) -> Result<Outcome> {
    let mut details = Vec::new();
    let base = |id: ExperimentId, policies: &[&str], k: f64| {
        let mut cfg = ExperimentConfig::preset(id, false);
        cfg.replications = 20;
        cfg.base_seed = seed;
        cfg.stochastic.horizon = 500;
        cfg.sweep = vec![k];
        cfg.policies = policies.iter().map(|p| spec(p)).collect();
        cfg
    };
    let ratio_of = |a: &[f64], b: &[f64]| mean(a).zip(mean(b)).map(|(x, y)| x / y).unwrap_or(f64::NAN);

    let varying = run_experiment(&base(ExperimentId::FdcSweepVarying, &["order-size-f-priority", "myopic"], 5.0))?;
    let invariant =
        run_experiment(&base(ExperimentId::FdcSweepInvariant, &["cost-comparison-v-priority", "myopic", "ipfc"], 5.0))?;
    for (name, r) in [("time-varying", &varying), ("time-invariant", &invariant)] {
        if r.failures() > 0 {
            details.push(format!("{name}: {} failed runs", r.failures()));
        }
    }
    let os_vs_myopic = ratio_of(&varying.costs(5.0, "order-size-f-priority"), &varying.costs(5.0, "myopic"));
    let cc_vs_myopic = ratio_of(&invariant.costs(5.0, "cost-comparison-v-priority"), &invariant.costs(5.0, "myopic"));
    let cc_vs_ipfc = ratio_of(&invariant.costs(5.0, "cost-comparison-v-priority"), &invariant.costs(5.0, "ipfc"));
    for (what, r) in [
        ("order-size-f-priority / myopic (varying)", os_vs_myopic),
        ("cost-comparison-v-priority / myopic (invariant)", cc_vs_myopic),
        ("cost-comparison-v-priority / ipfc (invariant)", cc_vs_ipfc),
    ] {
        if !(r <= 1.20) {
            details.push(format!("{what} = {r:.4} > 1.20"));
        }
    }

    let mut timing = base(ExperimentId::FdcSweepVarying, &["order-size-f-priority", "pure-greedy", "myopic"], 3.0);
    timing.sweep = vec![3.0, 7.0];
    let varying_t = run_experiment(&timing)?;
    let mut timing = base(ExperimentId::FdcSweepInvariant, &["cost-comparison-v-priority", "myopic"], 3.0);
    timing.sweep = vec![3.0, 7.0];
    let invariant_t = run_experiment(&timing)?;
    let growth = |r: &super::experiments::ExperimentResult, p: &str| r.mean_decision_time(7.0, p) / r.mean_decision_time(3.0, p);
    let myopic_growth = growth(&varying_t, "myopic").min(growth(&invariant_t, "myopic"));
    let gpg: Vec<(&str, f64)> = vec![
        ("order-size-f-priority", growth(&varying_t, "order-size-f-priority")),
        ("pure-greedy", growth(&varying_t, "pure-greedy")),
        ("cost-comparison-v-priority", growth(&invariant_t, "cost-comparison-v-priority")),
    ];
    if !(myopic_growth >= 4.0) {
        details.push(format!("myopic decision time grows {myopic_growth:.2}x from K=3 to K=7, need >= 4x"));
    }
    for (p, g) in &gpg {
        if !(*g <= 1.5) {
            details.push(format!("{p} decision time grows {g:.2}x from K=3 to K=7, need <= 1.5x"));
        }
    }
    Ok(Outcome {
        passed: details.is_empty(),
        summary: format!(
            "cost ratios {os_vs_myopic:.4}, {cc_vs_myopic:.4}, {cc_vs_ipfc:.4}; decision-time growth myopic {myopic_growth:.2}x, gated greedy max {:.2}x",
            gpg.iter().map(|(_, g)| *g).fold(0.0, f64::max)
        ),
        details,
        metrics: json!({
            "os_fp_over_myopic": os_vs_myopic,
            "cc_vp_over_myopic": cc_vs_myopic,
            "cc_vp_over_ipfc": cc_vs_ipfc,
            "myopic_time_growth": myopic_growth,
            "gpg_time_growth": gpg.iter().map(|(p, g)| json!({"policy": p, "growth": g})).collect::<Vec<_>>(),
        }),
    })
}

/// Small stochastic setting for checking the fluid LP against the exhaustive oracle.
pub fn lp_sanity_config() -> StochasticConfig {
    StochasticConfig {
        n: 4,
        k: 2,
        horizon: 4,
        f0: 5.0,
        f_fdc: 2.0,
        a: 1.0,
        b: 3.0,
        order_sizes: vec![1, 2],
        type_counts: vec![3, 3],
        size_probs: vec![0.5, 0.5],
        tau: 1.5,
        regime: CostRegime::TimeInvariant,
    }
}

/// Replaces the orders with fresh draws from the instance's order-type distribution.
pub fn resample_orders(inst: &Instance, rng: &mut Stream) -> Result<Instance> {
    let dist = inst.meta.order_types.as_ref().ok_or_else(|| config("instance has no order-type distribution"))?;
    let mut out = inst.clone();
    out.orders.fill(0);
    for t in 0..inst.horizon {
        let q = rng.categorical(&dist.probabilities);
        for &i in &dist.types[q] {
            out.orders[t * inst.n + i] = 1;
        }
    }
    Ok(out)
}

fn lp_sanity(seed: u64) -> Result<Outcome> {
    let mut details = Vec::new();
    let dist = crate::baselines::OrderTypeDistribution { types: vec![vec![0]], probabilities: vec![1.0] };
    let col = [5.0, 1.0];
    let hand = build_aggregate_lp(&dist, &[10.0, 1.0], &crate::model::CostColumn::new(&col, 1)?, &[1], 2)?;
    let hand_value = solve_lp(&hand, None)?.objective;
    if (hand_value - 17.0).abs() > 1e-6 {
        details.push(format!("hand LP value {hand_value}, expected 17"));
    }
    let cfg = lp_sanity_config();
    let samples = 200;
    let mut worst_z = f64::NEG_INFINITY;
    let mut rng = Stream::substream(seed, tag::SUITE);
    for setup in 0..20 {
        let inst = gen_stochastic(&cfg, seed.wrapping_add(setup))?;
        let dist = inst.meta.order_types.clone().expect("stochastic instances carry their types");
        let lp = build_aggregate_lp(&dist, &inst.fixed_costs, &inst.cost_column(0), &inst.initial_inventory, inst.horizon)?;
        let sol = solve_lp(&lp, None)?;
        if sol.status != LpStatus::Optimal {
            details.push(format!("setup {setup}: LP is {:?}", sol.status));
            continue;
        }
        if sol.max_residual > 1e-7 {
            details.push(format!("setup {setup}: LP residual {}", sol.max_residual));
        }
        let opts = (0..samples)
            .map(|_| Ok(exact_opt(&resample_orders(&inst, &mut rng)?)?.opt_cost))
            .collect::<Result<Vec<f64>>>()?;
        let (m, se) = (mean(&opts).expect("nonempty"), standard_error(&opts).expect("nonempty"));
        if se > 0.0 {
            worst_z = worst_z.max((sol.objective - m) / se);
        }
        if sol.objective > m + 3.0 * se + TOLERANCE {
            details.push(format!("setup {setup}: LP {} above mean optimum {m} (se {se})", sol.objective));
        }
    }
    Ok(Outcome {
        passed: details.is_empty(),
        summary: format!(
            "hand LP {hand_value:.9}; 20 setups x {samples} samples, largest (LP - mean opt) / se = {worst_z:.3}"
        ),
        details,
        metrics: json!({"hand_lp": hand_value, "max_z": worst_z}),
    })
}

fn service_equivalence(seed: u64) -> Result<Outcome> {
    let mut rng = Stream::substream(seed, tag::SUITE);
    let store = SessionStore::new();
    let mut details = Vec::new();
    let varying = ["order-size-f-priority", "pure-greedy", "all-rdc", "myopic"];
    let invariant = ["cost-comparison-v-priority", "pure-greedy", "myopic", "ipfc"];
    let single = ["cost-comparison-adjv-priority", "order-size-adjv-priority", "better-of-two", "randomized-cc-v-priority"];
    let sessions = 100;
    for s in 0..sessions {
        let kind = rng.below(3);
        let (inst, name) = match kind {
            0 => {
                let shape = TinyShape { t_max: 12, ..TinyShape::default() };
                (tiny_instance(&mut rng, &shape), varying[rng.below(4) as usize])
            }
            1 => {
                let cfg = StochasticConfig { horizon: 12, ..lp_sanity_config() };
                (gen_stochastic(&cfg, rng.next_u64())?, invariant[rng.below(4) as usize])
            }
            _ => {
                let name = single[rng.below(4) as usize];
                let regime =
                    if name == "randomized-cc-v-priority" { CostRegime::TimeInvariant } else { CostRegime::TimeVarying };
                let shape = TinyShape { k_max: 1, t_max: 12, regime, ..TinyShape::default() };
                (tiny_instance(&mut rng, &shape), name)
            }
        };
        let policy_seed = rng.next_u64();
        let batch = run_policy(&inst, &spec(name), policy_seed)?;
        let send = |v: Value| -> Result<Value> {
            let line = store.handle_message(&v.to_string());
            let r: Value = serde_json::from_str(&line).map_err(|e| Error::Invariant(e.to_string()))?;
            if r["ok"] != json!(true) {
                return Err(Error::Invariant(format!("service rejected a request: {r}")));
            }
            Ok(r)
        };
        let opened = send(json!({"v": 1, "op": "open", "policy": name, "header": inst.header(), "seed": policy_seed}))?;
        let sid = opened["session_id"].clone();
        let mut mismatch = None;
        for t in 0..inst.horizon {
            let costs: Vec<Vec<f64>> = (0..inst.dcs()).map(|k| inst.cost_column(t).dc(k).to_vec()).collect();
            let r = send(json!({"v": 1, "op": "decide", "session": sid, "order": inst.order(t), "costs": costs}))?;
            let plan = FulfillmentPlan::from_dense(&serde_json::from_value::<Vec<Vec<i64>>>(r["plan"].clone()).map_err(|e| Error::Invariant(e.to_string()))?)?;
            let rec = &batch.trace[t];
            if Some(&plan) != rec.plan.as_ref() || r["period_cost"].as_f64() != Some(rec.period_cost) || r["gated"].as_bool() != Some(rec.gated) {
                mismatch = Some(t);
                break;
            }
        }
        let closed = send(json!({"v": 1, "op": "close", "session": sid}))?;
        if let Some(t) = mismatch {
            details.push(format!("session {s} ({name}): period {t} differs from the batch run"));
        } else if closed["total_cost"].as_f64() != Some(batch.total_cost) {
            details.push(format!("session {s} ({name}): total {} vs batch {}", closed["total_cost"], batch.total_cost));
        }
    }
    let mismatches = details.len();
    Ok(Outcome {
        passed: mismatches == 0,
        summary: format!("{sessions} sessions, {mismatches} mismatches"),
        details,
        metrics: json!({"sessions": sessions, "mismatches": mismatches}),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in SuiteId::ALL {
            assert_eq!(id.as_str().parse::<SuiteId>().unwrap(), id);
        }
    }

    #[test]
    fn greedy_trap_passes_quickly() {
        let r = run_suite(SuiteId::GreedyTrap, DEFAULT_SEED);
        assert!(r.passed, "{r}");
        assert!(r.to_string().starts_with("PASS greedy-trap"));
    }

    #[test]
    fn cross_check_params_fit_the_oracle() {
        for p in cross_check_params() {
            for inst in gen_adversarial(&p).unwrap() {
                assert!(inst.n <= 4 && inst.horizon <= 5, "{}", p.family_id());
            }
        }
    }

    #[test]
    fn pure_greedy_dominates_random_witnesses() {
        let mut rng = Stream::new(9);
        let shape = TinyShape { regime: CostRegime::TimeInvariant, ..TinyShape::default() };
        for _ in 0..50 {
            let inst = tiny_instance(&mut rng, &shape);
            let w: Vec<_> = (0..20).map(|_| random_feasible_plans(&inst, &mut rng)).collect();
            assert_eq!(prefix_dominance_violations(&inst, &spec("pure-greedy"), 0, &w).unwrap(), Some(0));
        }
    }
}
