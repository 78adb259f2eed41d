//! Seeded experiment sweeps with tidy CSV output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::tiny::{random_feasible_plans, tiny_instance, TinyShape};
use super::suites::prefix_dominance_violations;
use crate::error::{config, Error, Result};
use crate::instances::{gen_adversarial, gen_stochastic, AdversarialParams, StochasticConfig};
use crate::model::{CostRegime, Instance};
use crate::oracle::{bound_value, bruteforce_opt, BoundId, BoundInputs, SearchLimits};
use crate::policy::PolicySpec;
use crate::rng::{tag, Stream};
use crate::sim::{run_policy_with, TraceMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    HorizonSweepVarying,
    FdcSweepVarying,
    SingleFdcVarying,
    HorizonSweepInvariant,
    FdcSweepInvariant,
    SingleFdcInvariant,
    Stress,
    BoundsGrid,
    #[serde(rename = "lemma1-property")]
    PrefixDominanceProperty,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::HorizonSweepVarying,
        ExperimentId::FdcSweepVarying,
        ExperimentId::SingleFdcVarying,
        ExperimentId::HorizonSweepInvariant,
        ExperimentId::FdcSweepInvariant,
        ExperimentId::SingleFdcInvariant,
        ExperimentId::Stress,
        ExperimentId::BoundsGrid,
        ExperimentId::PrefixDominanceProperty,
        ExperimentId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::HorizonSweepVarying => "horizon-sweep-varying",
            ExperimentId::FdcSweepVarying => "fdc-sweep-varying",
            ExperimentId::SingleFdcVarying => "single-fdc-varying",
            ExperimentId::HorizonSweepInvariant => "horizon-sweep-invariant",
            ExperimentId::FdcSweepInvariant => "fdc-sweep-invariant",
            ExperimentId::SingleFdcInvariant => "single-fdc-invariant",
            ExperimentId::Stress => "stress",
            ExperimentId::BoundsGrid => "bounds-grid",
            ExperimentId::PrefixDominanceProperty => "lemma1-property",
            ExperimentId::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| config(format!("unknown experiment {s:?}")))
    }
}

/// What the sweep value controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    Horizon,
    Fdcs,
    F0,
    Tau,
    /// Largest `b / a` in the bound grid.
    CostSpread,
    /// Largest horizon of the random property instances.
    MaxHorizon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub sweep_param: SweepParam,
    /// Strictly increasing.
    pub sweep: Vec<f64>,
    pub policies: Vec<PolicySpec>,
    pub replications: usize,
    pub base_seed: u64,
    /// Template for stochastic sweeps; the swept field is overwritten.
    pub stochastic: StochasticConfig,
    #[serde(default)]
    pub full_scale: bool,
    #[serde(default = "default_rows")]
    pub rows_file: String,
    #[serde(default = "default_timings")]
    pub timings_file: String,
    #[serde(default = "default_aggregate")]
    pub aggregate_file: String,
}

fn default_rows() -> String {
    "rows.csv".into()
}
fn default_timings() -> String {
    "timings.csv".into()
}
fn default_aggregate() -> String {
    "aggregate.csv".into()
}

fn specs(names: &[&str]) -> Vec<PolicySpec> {
    names.iter().map(|n| n.parse().expect("built-in policy name")).collect()
}

fn steps(lo: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| lo + step * j as f64).collect()
}

impl ExperimentConfig {
    /// Built-in settings. Desk scale keeps `T <= 500` and `K <= 7` wherever the
    /// myopic baseline runs; `full_scale` restores the original sizes.
    pub fn preset(id: ExperimentId, full_scale: bool) -> Self {
        let varying = StochasticConfig { regime: CostRegime::TimeVarying, ..StochasticConfig::default() };
        let invariant = StochasticConfig { regime: CostRegime::TimeInvariant, ..StochasticConfig::default() };
        let desk = |mut c: StochasticConfig, k: usize| {
            if !full_scale {
                c.k = k;
                c.horizon = 500;
            }
            c
        };
        let horizons = if full_scale { steps(200.0, 200.0, 10) } else { steps(100.0, 100.0, 5) };
        let fdcs = if full_scale { steps(3.0, 2.0, 7) } else { vec![3.0, 5.0, 7.0] };
        let multi_varying = specs(&["order-size-f-priority", "pure-greedy", "all-rdc", "myopic"]);
        let multi_invariant = specs(&["cost-comparison-v-priority", "pure-greedy", "all-rdc", "myopic", "ipfc"]);
        let single_varying =
            specs(&["cost-comparison-adjv-priority", "order-size-adjv-priority", "better-of-two", "order-size-f-priority", "myopic"]);
        let single_invariant = specs(&["cost-comparison-v-priority", "randomized-cc-v-priority", "myopic", "ipfc"]);
        let (sweep_param, sweep, policies, stochastic, replications) = match id {
            ExperimentId::HorizonSweepVarying => (SweepParam::Horizon, horizons, multi_varying, desk(varying, 5), 100),
            ExperimentId::FdcSweepVarying => (SweepParam::Fdcs, fdcs, multi_varying, desk(varying, 5), 100),
            ExperimentId::SingleFdcVarying => {
                (SweepParam::Horizon, horizons, single_varying, StochasticConfig { k: 1, ..desk(varying, 1) }, 100)
            }
            ExperimentId::HorizonSweepInvariant => (SweepParam::Horizon, horizons, multi_invariant, desk(invariant, 5), 100),
            ExperimentId::FdcSweepInvariant => (SweepParam::Fdcs, fdcs, multi_invariant, desk(invariant, 5), 100),
            ExperimentId::SingleFdcInvariant => {
                (SweepParam::Horizon, horizons, single_invariant, StochasticConfig { k: 1, ..desk(invariant, 1) }, 100)
            }
            ExperimentId::Stress => {
                (SweepParam::F0, steps(50.0, 50.0, 10), specs(&["myopic", "order-size-f-priority"]), varying, 1)
            }
            ExperimentId::BoundsGrid => (SweepParam::CostSpread, vec![2.0, 10.0, 100.0], Vec::new(), varying, 10_000),
            ExperimentId::PrefixDominanceProperty => (
                SweepParam::MaxHorizon,
                vec![2.0, 3.0, 4.0, 5.0],
                specs(&[
                    "order-size-f-priority",
                    "cost-comparison-v-priority",
                    "cost-comparison-adjv-priority",
                    "order-size-adjv-priority",
                    "randomized-cc-v-priority",
                    "better-of-two",
                    "pure-greedy",
                ]),
                varying,
                250,
            ),
            ExperimentId::Custom => (SweepParam::Horizon, Vec::new(), Vec::new(), desk(varying, 5), 100),
        };
        ExperimentConfig {
            experiment: id,
            sweep_param,
            sweep,
            policies,
            replications,
            base_seed: 0,
            stochastic,
            full_scale,
            rows_file: default_rows(),
            timings_file: default_timings(),
            aggregate_file: default_aggregate(),
        }
    }

    /// Starts from the preset and overlays the given JSON object. Nested
    /// `stochastic` fields are merged one by one.
    pub fn from_json(id: ExperimentId, full_scale: bool, overrides: &Value) -> Result<Self> {
        let mut base = serde_json::to_value(Self::preset(id, full_scale)).expect("config serializes");
        let obj = overrides.as_object().ok_or_else(|| config("experiment config must be a JSON object"))?;
        if let Some(given) = obj.get("experiment") {
            if given.as_str() != Some(id.as_str()) {
                return Err(config(format!("config names experiment {given}, command line says {}", id.as_str())));
            }
        }
        for (key, value) in obj {
            match (key.as_str(), value) {
                ("stochastic", Value::Object(inner)) => {
                    for (k, v) in inner {
                        base["stochastic"][k] = v.clone();
                    }
                }
                _ => base[key] = value.clone(),
            }
        }
        let cfg: ExperimentConfig = serde_json::from_value(base).map_err(|e| config(format!("bad experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() {
            return Err(config("sweep values are empty"));
        }
        if self.sweep.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(config("sweep values must be strictly increasing"));
        }
        if self.replications == 0 {
            return Err(config("replications must be positive"));
        }
        let simulated = !matches!(self.experiment, ExperimentId::BoundsGrid);
        if simulated && self.policies.is_empty() {
            return Err(config("no policies given"));
        }
        match self.sweep_param {
            SweepParam::Horizon | SweepParam::Fdcs | SweepParam::MaxHorizon => {
                if self.sweep.iter().any(|v| !(*v >= 1.0 && v.fract() == 0.0)) {
                    return Err(config("horizon and FDC sweeps take positive integers"));
                }
            }
            SweepParam::F0 | SweepParam::Tau => {
                if self.sweep.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(config("f0 and tau sweeps take finite nonnegative values"));
                }
            }
            SweepParam::CostSpread => {
                if self.sweep.iter().any(|v| !(*v >= 1.0 && v.is_finite())) {
                    return Err(config("cost spread values must be at least 1"));
                }
            }
        }
        let fixed_param = match self.experiment {
            ExperimentId::Stress => Some(SweepParam::F0),
            ExperimentId::BoundsGrid => Some(SweepParam::CostSpread),
            ExperimentId::PrefixDominanceProperty => Some(SweepParam::MaxHorizon),
            ExperimentId::Custom => None,
            _ => None,
        };
        if let Some(p) = fixed_param {
            if self.sweep_param != p {
                return Err(config(format!("{} sweeps {:?}", self.experiment.as_str(), p)));
            }
        } else if matches!(self.sweep_param, SweepParam::CostSpread | SweepParam::MaxHorizon) {
            return Err(config("stochastic sweeps take horizon, fdcs, f0 or tau"));
        }
        if simulated && !matches!(self.experiment, ExperimentId::Stress | ExperimentId::PrefixDominanceProperty) {
            for v in &self.sweep {
                self.stochastic_at(*v).validate()?;
            }
        }
        Ok(())
    }

    /// The stochastic setting at one sweep value.
    pub fn stochastic_at(&self, value: f64) -> StochasticConfig {
        let mut c = self.stochastic.clone();
        match self.sweep_param {
            SweepParam::Horizon => c.horizon = value as usize,
            SweepParam::Fdcs => c.k = value as usize,
            SweepParam::F0 => c.f0 = value,
            SweepParam::Tau => c.tau = value,
            SweepParam::CostSpread | SweepParam::MaxHorizon => {}
        }
        c
    }

    pub fn replication_seed(&self, replication: usize) -> u64 {
        self.base_seed.wrapping_add(replication as u64)
    }
}

/// One (sweep value, policy, replication) outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub sweep_value: f64,
    pub policy: String,
    pub replication: usize,
    pub seed: u64,
    /// `ok`, or `error` with the reason in `message`.
    pub status: String,
    /// Total cost; for the bound grid the upper/lower bound ratio, for the
    /// property check the number of violated inequalities.
    pub cost: Option<f64>,
    pub gated_periods: Option<usize>,
    pub repaired_periods: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub experiment: String,
    pub sweep_value: f64,
    pub policy: String,
    pub replication: usize,
    pub wall_time: f64,
    pub decision_time_per_order: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub experiment: String,
    pub sweep_value: f64,
    pub policy: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_cost: Option<f64>,
    pub se_cost: Option<f64>,
    pub mean_gated_periods: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentResult {
    pub rows: Vec<Row>,
    pub timings: Vec<TimingRow>,
}

impl ExperimentResult {
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        aggregate(&self.rows)
    }

    /// Successful costs for one sweep value and policy, in replication order.
    pub fn costs(&self, sweep_value: f64, policy: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.sweep_value == sweep_value && r.policy == policy)
            .filter_map(|r| r.cost)
            .collect()
    }

    pub fn mean_decision_time(&self, sweep_value: f64, policy: &str) -> f64 {
        let xs: Vec<f64> = self
            .timings
            .iter()
            .filter(|r| r.sweep_value == sweep_value && r.policy == policy)
            .map(|r| r.decision_time_per_order)
            .collect();
        mean(&xs).unwrap_or(f64::NAN)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status != "ok").count()
    }
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Standard error of the mean, with the `n - 1` sample variance; zero for a single value.
pub fn standard_error(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Some(0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    Some((var / xs.len() as f64).sqrt())
}

/// Means and standard errors per (sweep value, policy), in first-seen order.
/// Summation follows row order, so the result recomputes bit for bit from the
/// rows file.
pub fn aggregate(rows: &[Row]) -> Vec<AggregateRow> {
    let mut keys: Vec<(String, f64, String)> = Vec::new();
    for r in rows {
        let key = (r.experiment.clone(), r.sweep_value, r.policy.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(experiment, sweep_value, policy)| {
            let group: Vec<&Row> =
                rows.iter().filter(|r| r.sweep_value == sweep_value && r.policy == policy && r.experiment == experiment).collect();
            let costs: Vec<f64> = group.iter().filter_map(|r| r.cost).collect();
            let gated: Vec<f64> = group.iter().filter_map(|r| r.gated_periods.map(|g| g as f64)).collect();
            AggregateRow {
                experiment,
                sweep_value,
                policy,
                runs: group.len(),
                failures: group.iter().filter(|r| r.status != "ok").count(),
                mean_cost: mean(&costs),
                se_cost: standard_error(&costs),
                mean_gated_periods: mean(&gated),
            }
        })
        .collect()
}

fn policy_label(spec: &PolicySpec) -> String {
    match spec {
        PolicySpec::Custom { .. } => serde_json::to_string(spec).expect("spec serializes"),
        _ => spec.name().to_string(),
    }
}

struct Job {
    value: f64,
    replication: usize,
}

fn simulate(cfg: &ExperimentConfig, inst: &Instance, job: &Job, seed: u64, out: &mut ExperimentResult) {
    for spec in &cfg.policies {
        let label = policy_label(spec);
        let mut row = Row {
            experiment: cfg.experiment.as_str().to_string(),
            sweep_value: job.value,
            policy: label.clone(),
            replication: job.replication,
            seed,
            status: "ok".into(),
            cost: None,
            gated_periods: None,
            repaired_periods: None,
            message: String::new(),
        };
        match run_policy_with(inst, spec, seed, TraceMode::CostsOnly) {
            Ok(run) => {
                row.cost = Some(run.total_cost);
                row.gated_periods = Some(run.gated_periods());
                row.repaired_periods = Some(run.repaired_periods());
                out.timings.push(TimingRow {
                    experiment: row.experiment.clone(),
                    sweep_value: job.value,
                    policy: label,
                    replication: job.replication,
                    wall_time: run.wall_time,
                    decision_time_per_order: run.decision_time_per_order(),
                });
            }
            Err(e) => {
                log::warn!("{} at {} replication {}: {e}", row.policy, job.value, job.replication);
                row.status = "error".into();
                row.message = e.to_string();
            }
        }
        out.rows.push(row);
    }
}

fn error_rows(cfg: &ExperimentConfig, job: &Job, seed: u64, e: &Error) -> ExperimentResult {
    let rows = cfg
        .policies
        .iter()
        .map(|spec| Row {
            experiment: cfg.experiment.as_str().to_string(),
            sweep_value: job.value,
            policy: policy_label(spec),
            replication: job.replication,
            seed,
            status: "error".into(),
            cost: None,
            gated_periods: None,
            repaired_periods: None,
            message: e.to_string(),
        })
        .collect();
    ExperimentResult { rows, timings: Vec::new() }
}

fn bound_rows(cfg: &ExperimentConfig, job: &Job, seed: u64) -> ExperimentResult {
    let mut rng = Stream::substream(seed, tag::SUITE);
    let (f0, f_min, a, spread) = grid_sample(&mut rng, job.value);
    let b = a * spread;
    let mut rows = Vec::new();
    for (label, upper, lower, fdcs) in [
        ("multi-fdc-varying", BoundId::OrderSizeFPriorityUpper, BoundId::MultiFdcVaryingLower, vec![f_min, f_min]),
        ("single-fdc-varying", BoundId::BetterOfTwoUpperSimplified, BoundId::SingleFdcVaryingLower, vec![f_min]),
    ] {
        let x = BoundInputs::new(f0, &fdcs).costs(a, b).relaxed();
        let ratio = bound_value(upper, &x).and_then(|u| bound_value(lower, &x).map(|l| u / l));
        let (status, cost, message) = match ratio {
            Ok(r) => ("ok", Some(r), String::new()),
            Err(e) => ("error", None, e.to_string()),
        };
        rows.push(Row {
            experiment: cfg.experiment.as_str().to_string(),
            sweep_value: job.value,
            policy: label.into(),
            replication: job.replication,
            seed,
            status: status.into(),
            cost,
            gated_periods: None,
            repaired_periods: None,
            message,
        });
    }
    ExperimentResult { rows, timings: Vec::new() }
}

/// `(f0, f_min, a, b / a)` on log scales, with `b / a` up to `max_spread`.
pub fn grid_sample(rng: &mut Stream, max_spread: f64) -> (f64, f64, f64, f64) {
    let log_uniform = |rng: &mut Stream, lo: f64, hi: f64| (rng.uniform(lo.ln(), hi.ln())).exp();
    let f0 = log_uniform(rng, 1e-2, 1e4);
    let f_min = log_uniform(rng, 1e-2, 1e4);
    let a = log_uniform(rng, 1e-2, 1e2);
    let spread = if max_spread > 1.0 { log_uniform(rng, 1.0, max_spread) } else { 1.0 };
    (f0, f_min, a, spread)
}

fn property_rows(cfg: &ExperimentConfig, job: &Job, seed: u64) -> ExperimentResult {
    let mut rng = Stream::substream(seed, tag::SUITE);
    let single = rng.bernoulli(0.5);
    let shape = TinyShape {
        t_max: job.value as usize,
        regime: CostRegime::TimeInvariant,
        k_max: if single { 1 } else { 3 },
        ..TinyShape::default()
    };
    let inst = tiny_instance(&mut rng, &shape);
    let mut witnesses: Vec<_> = (0..100).map(|_| random_feasible_plans(&inst, &mut rng)).collect();
    let opt = bruteforce_opt(&inst, &SearchLimits::default());
    if let Ok(Some(plan)) = opt.map(|o| o.opt_plan) {
        witnesses.push(plan);
    }
    let mut rows = Vec::new();
    for spec in &cfg.policies {
        let (status, cost, message) = match prefix_dominance_violations(&inst, spec, seed, &witnesses) {
            Ok(Some(v)) => ("ok", Some(v as f64), String::new()),
            Ok(None) => continue,
            Err(e) => ("error", None, e.to_string()),
        };
        rows.push(Row {
            experiment: cfg.experiment.as_str().to_string(),
            sweep_value: job.value,
            policy: policy_label(spec),
            replication: job.replication,
            seed,
            status: status.into(),
            cost,
            gated_periods: None,
            repaired_periods: None,
            message,
        });
    }
    ExperimentResult { rows, timings: Vec::new() }
}

fn run_job(cfg: &ExperimentConfig, job: &Job) -> ExperimentResult {
    let seed = cfg.replication_seed(job.replication);
    match cfg.experiment {
        ExperimentId::BoundsGrid => bound_rows(cfg, job, seed),
        ExperimentId::PrefixDominanceProperty => property_rows(cfg, job, seed),
        ExperimentId::Stress => match gen_adversarial(&AdversarialParams::Stress { f0: job.value }) {
            Ok(mut insts) => {
                let mut out = ExperimentResult::default();
                simulate(cfg, &insts.remove(0), job, seed, &mut out);
                out
            }
            Err(e) => error_rows(cfg, job, seed, &e),
        },
        _ => match gen_stochastic(&cfg.stochastic_at(job.value), seed) {
            Ok(inst) => {
                let mut out = ExperimentResult::default();
                simulate(cfg, &inst, job, seed, &mut out);
                out
            }
            Err(e) => error_rows(cfg, job, seed, &e),
        },
    }
}

/// Runs every (sweep value, replication) job on the worker pool. Rows come
/// back ordered by sweep value, policy, then replication, whatever the
/// completion order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let jobs: Vec<Job> = cfg
        .sweep
        .iter()
        .flat_map(|&value| (0..cfg.replications).map(move |replication| Job { value, replication }))
        .collect();
    let parts: Vec<ExperimentResult> = jobs.par_iter().map(|job| run_job(cfg, job)).collect();
    let mut result = ExperimentResult::default();
    for part in parts {
        result.rows.extend(part.rows);
        result.timings.extend(part.timings);
    }
    let order = |p: &str| cfg.policies.iter().position(|s| policy_label(s) == p).unwrap_or(usize::MAX);
    let key = |v: f64, p: &str, r: usize| (cfg.sweep.iter().position(|&s| s == v), order(p), p.to_string(), r);
    result.rows.sort_by_key(|r| key(r.sweep_value, &r.policy, r.replication));
    result.timings.sort_by_key(|r| key(r.sweep_value, &r.policy, r.replication));
    Ok(result)
}

pub fn csv_bytes<T: Serialize>(records: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    r.deserialize().map(|row| row.map_err(|e| Error::Io(std::io::Error::other(e)))).collect()
}

/// Writes the rows, timings and aggregate files plus the resolved config.
pub fn write_outputs(cfg: &ExperimentConfig, result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        fs::File::create(&path)?.write_all(&bytes)?;
        written.push(path);
        Ok(())
    };
    put(&cfg.rows_file, csv_bytes(&result.rows)?)?;
    put(&cfg.timings_file, csv_bytes(&result.timings)?)?;
    put(&cfg.aggregate_file, csv_bytes(&result.aggregate())?)?;
    put("config.json", serde_json::to_vec_pretty(cfg).expect("config serializes"))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(id: ExperimentId) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::preset(id, false);
        cfg.replications = 2;
        cfg.stochastic.n = 8;
        cfg.stochastic.order_sizes = vec![1, 2, 3];
        cfg.stochastic.type_counts = vec![4, 4, 2];
        cfg.stochastic.size_probs = vec![0.5, 0.3, 0.2];
        cfg.stochastic.horizon = 30;
        cfg.stochastic.tau = 0.5;
        cfg
    }

    #[test]
    fn ids_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.as_str().parse::<ExperimentId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.as_str()));
        }
        assert!("nope".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn sweep_must_increase() {
        let mut cfg = small(ExperimentId::HorizonSweepVarying);
        cfg.sweep = vec![10.0, 10.0];
        assert!(cfg.validate().is_err());
        cfg.sweep = vec![];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn overrides_merge_into_preset() {
        let cfg = ExperimentConfig::from_json(
            ExperimentId::FdcSweepVarying,
            false,
            &serde_json::json!({"replications": 3, "stochastic": {"tau": 0.4}, "sweep": [2, 4]}),
        )
        .unwrap();
        assert_eq!((cfg.replications, cfg.stochastic.tau, cfg.sweep.clone()), (3, 0.4, vec![2.0, 4.0]));
        assert_eq!(cfg.stochastic.horizon, 500);
        assert!(ExperimentConfig::from_json(ExperimentId::Stress, false, &serde_json::json!({"bogus": 1})).is_err());
    }

    #[test]
    fn same_seed_same_bytes() {
        let mut cfg = small(ExperimentId::HorizonSweepInvariant);
        cfg.sweep = vec![10.0, 20.0];
        cfg.replications = 1;
        let a = csv_bytes(&run_experiment(&cfg).unwrap().rows).unwrap();
        let b = csv_bytes(&run_experiment(&cfg).unwrap().rows).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn aggregate_recomputes_from_rows_file() {
        let mut cfg = small(ExperimentId::FdcSweepVarying);
        cfg.sweep = vec![1.0, 2.0];
        cfg.replications = 3;
        let result = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_outputs(&cfg, &result, dir.path()).unwrap();
        let rows = read_rows(dir.path().join("rows.csv")).unwrap();
        assert_eq!(rows, result.rows);
        let again = csv_bytes(&aggregate(&rows)).unwrap();
        assert_eq!(again, fs::read(dir.path().join("aggregate.csv")).unwrap());
    }

    #[test]
    fn failures_are_recorded_per_row() {
        let mut cfg = small(ExperimentId::HorizonSweepVarying);
        cfg.sweep = vec![10.0];
        cfg.replications = 1;
        cfg.policies = specs(&["all-rdc", "ipfc"]);
        let result = run_experiment(&cfg).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert_eq!(result.rows[0].status, "ok");
        assert_eq!(result.rows[1].status, "error");
        assert!(result.rows[1].message.contains("time-invariant"));
    }

    #[test]
    fn stress_rows_follow_closed_forms_off_the_threshold() {
        let mut cfg = ExperimentConfig::preset(ExperimentId::Stress, false);
        cfg.sweep = vec![50.0];
        let result = run_experiment(&cfg).unwrap();
        // 50: n = 8 > theta ~ 7.6, so the bulk order is gated
        assert_eq!(result.costs(50.0, "myopic"), vec![8.0 * 52.0]);
        assert_eq!(result.costs(50.0, "order-size-f-priority"), vec![50.0 + 16.0]);
    }

    #[test]
    fn bounds_grid_stays_within_gaps() {
        let mut cfg = ExperimentConfig::preset(ExperimentId::BoundsGrid, false);
        cfg.replications = 200;
        let result = run_experiment(&cfg).unwrap();
        assert_eq!(result.failures(), 0);
        assert_eq!(result.rows.len(), 3 * 200 * 2);
    }
}
