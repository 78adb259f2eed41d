//! Gated priority-based greedy policies and the policy interface shared with
//! the baselines.

pub mod gating;
pub mod priority;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{ipfc::IpfcPolicy, myopic::MyopicPolicy, OrderTypeDistribution};
use crate::error::{config, Error, Result};
use crate::model::{
    CostBounds, CostColumn, CostRegime, FulfillmentPlan, Instance, InventoryState,
};
use crate::rng::{tag, Stream};

pub use gating::{
    better_of_two_select, gate_cost_comparison, gate_order_size, gate_small_order, order_size_adjv_params, randomized_gate_probability,
    rdc_only_cost, theta_default, BetterOfTwoChoice, GateTarget, GatingCondition,
};
pub use priority::{greedy_plan, Adjustment, PriorityRule, Ranking};

/// What a policy may know before the first order: no orders, no future costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceHeader {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub fixed_costs: Vec<f64>,
    pub cost_regime: CostRegime,
    #[serde(default)]
    pub cost_bounds: Option<CostBounds>,
    /// Flat `[k-1][i]`.
    pub inventory: Vec<i64>,
    #[serde(default, rename = "T")]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub order_types: Option<OrderTypeDistribution>,
}

impl InstanceHeader {
    pub fn dcs(&self) -> usize {
        self.k + 1
    }

    pub fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(config("n must be positive"));
        }
        if self.fixed_costs.len() != self.k + 1 {
            return Err(config(format!("expected {} fixed costs, got {}", self.k + 1, self.fixed_costs.len())));
        }
        if self.fixed_costs.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(config("fixed costs must be finite and nonnegative"));
        }
        if self.inventory.len() != self.k * self.n {
            return Err(config(format!("expected {} inventory entries, got {}", self.k * self.n, self.inventory.len())));
        }
        if self.inventory.iter().any(|&q| q < 0) {
            return Err(config("inventory must be nonnegative"));
        }
        if let Some(cb) = self.cost_bounds {
            if !(cb.a > 0.0 && cb.a <= cb.b && cb.b.is_finite()) {
                return Err(config("cost bounds need 0 < a <= b"));
            }
        }
        Ok(())
    }

    fn bounds(&self, who: &str) -> Result<CostBounds> {
        self.cost_bounds.ok_or_else(|| config(format!("{who} needs cost bounds (a, b)")))
    }

    fn single_fdc(&self, who: &str) -> Result<()> {
        if self.k != 1 {
            return Err(config(format!("{who} needs exactly one FDC, instance has {}", self.k)));
        }
        Ok(())
    }

    fn invariant(&self, who: &str) -> Result<()> {
        if self.cost_regime != CostRegime::TimeInvariant {
            return Err(config(format!("{who} needs time-invariant variable costs")));
        }
        Ok(())
    }
}

impl Instance {
    pub fn header(&self) -> InstanceHeader {
        InstanceHeader {
            n: self.n,
            k: self.k,
            fixed_costs: self.fixed_costs.clone(),
            cost_regime: self.regime,
            cost_bounds: self.cost_bounds,
            inventory: self.initial_inventory.clone(),
            horizon: Some(self.horizon),
            order_types: self.meta.order_types.clone(),
        }
    }
}

/// A named policy with its parameters; `custom` exposes the raw framework.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum PolicySpec {
    OrderSizeFPriority {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
    },
    CostComparisonVPriority,
    CostComparisonAdjvPriority,
    OrderSizeAdjvPriority {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
    },
    RandomizedCcVPriority,
    BetterOfTwo,
    PureGreedy,
    AllRdc,
    Myopic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_fdcs: Option<usize>,
    },
    Ipfc,
    Custom {
        rule: PriorityRule,
        gate: GatingCondition,
        #[serde(default)]
        target: GateTarget,
    },
}

impl FromStr for PolicySpec {
    type Err = Error;

    /// Accepts a bare name (`all-rdc`) or a JSON object.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let value = if s.starts_with('{') {
            serde_json::from_str(s).map_err(|e| config(format!("bad policy spec {s}: {e}")))?
        } else {
            serde_json::json!({ "name": s })
        };
        serde_json::from_value(value).map_err(|e| config(format!("bad policy spec {s}: {e}")))
    }
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::OrderSizeFPriority { .. } => "order-size-f-priority",
            PolicySpec::CostComparisonVPriority => "cost-comparison-v-priority",
            PolicySpec::CostComparisonAdjvPriority => "cost-comparison-adjv-priority",
            PolicySpec::OrderSizeAdjvPriority { .. } => "order-size-adjv-priority",
            PolicySpec::RandomizedCcVPriority => "randomized-cc-v-priority",
            PolicySpec::BetterOfTwo => "better-of-two",
            PolicySpec::PureGreedy => "pure-greedy",
            PolicySpec::AllRdc => "all-rdc",
            PolicySpec::Myopic { .. } => "myopic",
            PolicySpec::Ipfc => "ipfc",
            PolicySpec::Custom { .. } => "custom",
        }
    }

    pub fn is_gpg(&self) -> bool {
        !matches!(self, PolicySpec::Myopic { .. } | PolicySpec::Ipfc)
    }

    /// Fills in defaults from the header and checks the policy applies to it.
    pub fn resolve(&self, header: &InstanceHeader) -> Result<GpgConfig> {
        let who = self.name();
        let f = &header.fixed_costs;
        let cfg = |rule, gate, target| GpgConfig { name: who.to_string(), rule, gate, target };
        let resolved = match *self {
            PolicySpec::OrderSizeFPriority { theta } => {
                let theta = match theta {
                    Some(t) => t,
                    None => {
                        let cb = header.bounds(who)?;
                        let f_min = f[1..]
                            .iter()
                            .copied()
                            .reduce(f64::min)
                            .ok_or_else(|| config(format!("{who} needs at least one FDC for its default threshold")))?;
                        theta_default(f[0], f_min, cb.a, cb.b)?
                    }
                };
                if !(theta >= 0.0) {
                    return Err(config(format!("theta must be >= 0, got {theta}")));
                }
                cfg(PriorityRule::FixedCost, GatingCondition::OrderSize { theta }, GateTarget::Rdc)
            }
            PolicySpec::CostComparisonVPriority => {
                header.invariant(who)?;
                cfg(PriorityRule::VariableCost, GatingCondition::CostComparison, GateTarget::Rdc)
            }
            PolicySpec::CostComparisonAdjvPriority => {
                header.single_fdc(who)?;
                let cb = header.bounds(who)?;
                cfg(
                    PriorityRule::AdjustedVariableCost { adjustment: Adjustment::Scale((cb.a / cb.b).sqrt()) },
                    GatingCondition::CostComparison,
                    GateTarget::Rdc,
                )
            }
            PolicySpec::OrderSizeAdjvPriority { eta, theta } => {
                header.single_fdc(who)?;
                let (eta, theta) = match (eta, theta) {
                    (Some(e), Some(t)) => (e, t),
                    _ => {
                        let cb = header.bounds(who)?;
                        let (e, t) = order_size_adjv_params(f[0], cb.a, cb.b)?;
                        (eta.unwrap_or(e), theta.unwrap_or(t))
                    }
                };
                if !(theta >= 0.0) {
                    return Err(config(format!("theta must be >= 0, got {theta}")));
                }
                cfg(
                    PriorityRule::AdjustedVariableCost { adjustment: Adjustment::Eta(eta) },
                    GatingCondition::SmallOrder { theta },
                    GateTarget::Fdc,
                )
            }
            PolicySpec::RandomizedCcVPriority => {
                header.single_fdc(who)?;
                header.invariant(who)?;
                if !(f[0] > 0.0 && f[1] > 0.0) {
                    return Err(config(format!("{who} needs positive fixed costs")));
                }
                cfg(
                    PriorityRule::VariableCost,
                    GatingCondition::RandomizedCostComparison { f0: f[0], f1: f[1] },
                    GateTarget::Rdc,
                )
            }
            PolicySpec::BetterOfTwo => {
                header.single_fdc(who)?;
                let cb = header.bounds(who)?;
                let inner = match better_of_two_select(f[0], f[1], cb.a, cb.b)? {
                    BetterOfTwoChoice::CostComparisonAdjv => PolicySpec::CostComparisonAdjvPriority,
                    BetterOfTwoChoice::OrderSizeAdjv { eta, theta } => {
                        PolicySpec::OrderSizeAdjvPriority { eta: Some(eta), theta: Some(theta) }
                    }
                };
                let mut r = inner.resolve(header)?;
                r.name = who.to_string();
                r
            }
            PolicySpec::PureGreedy => cfg(PriorityRule::FixedCost, GatingCondition::None, GateTarget::Rdc),
            PolicySpec::AllRdc => cfg(
                PriorityRule::Explicit { order: vec![(0..header.dcs()).collect()] },
                GatingCondition::None,
                GateTarget::Rdc,
            ),
            PolicySpec::Custom { ref rule, ref gate, target } => cfg(rule.clone(), gate.clone(), target),
            PolicySpec::Myopic { .. } | PolicySpec::Ipfc => {
                return Err(config(format!("{who} is not a gated greedy policy")))
            }
        };
        resolved.validate(header)?;
        Ok(resolved)
    }
}

/// Fully specified gated greedy policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpgConfig {
    pub name: String,
    pub rule: PriorityRule,
    pub gate: GatingCondition,
    pub target: GateTarget,
}

impl GpgConfig {
    fn validate(&self, header: &InstanceHeader) -> Result<()> {
        self.rule.validate(header.dcs(), header.n)?;
        match self.gate {
            GatingCondition::OrderSize { theta } | GatingCondition::SmallOrder { theta } if !(theta >= 0.0) => {
                return Err(config(format!("theta must be >= 0, got {theta}")))
            }
            GatingCondition::RandomizedCostComparison { f0, f1 } => {
                if header.k != 1 {
                    return Err(config("randomized gating needs exactly one FDC"));
                }
                if !(f0 > 0.0 && f1 > 0.0) {
                    return Err(config("randomized gating needs positive fixed costs"));
                }
            }
            _ => {}
        }
        if self.target == GateTarget::Fdc && header.k != 1 {
            return Err(config("FDC-targeted gating needs exactly one FDC"));
        }
        Ok(())
    }
}

/// Everything a policy sees at one period.
#[derive(Clone, Copy, Debug)]
pub struct PeriodView<'a> {
    pub period: usize,
    pub order: &'a [i64],
    pub costs: CostColumn<'a>,
    pub inventory: &'a InventoryState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub plan: FulfillmentPlan,
    /// The order bypassed the greedy allocation.
    pub gated: bool,
    /// A fallback repair was applied (unknown order type or stockout).
    pub repaired: bool,
}

pub trait Policy: Send {
    fn id(&self) -> &str;
    fn decide(&mut self, view: &PeriodView<'_>) -> Result<Decision>;
}

/// Instantiates a policy for one run. `seed` is the replication seed; the
/// policy derives its own gate or rounding substream from it.
pub fn build_policy(spec: &PolicySpec, header: &InstanceHeader, seed: u64) -> Result<Box<dyn Policy>> {
    header.check()?;
    match spec {
        PolicySpec::Myopic { max_fdcs } => Ok(Box::new(MyopicPolicy::new(header, *max_fdcs)?)),
        PolicySpec::Ipfc => Ok(Box::new(IpfcPolicy::new(header, seed)?)),
        _ => Ok(Box::new(GpgPolicy::new(spec.resolve(header)?, header, seed))),
    }
}

pub struct GpgPolicy {
    cfg: GpgConfig,
    fixed_costs: Vec<f64>,
    /// Ranking reused across periods once known.
    cached: Option<Ranking>,
    cache_on_first_use: bool,
    gate_rng: Stream,
}

impl GpgPolicy {
    pub fn new(cfg: GpgConfig, header: &InstanceHeader, seed: u64) -> Self {
        let fixed_costs = header.fixed_costs.clone();
        let cached = if cfg.rule.time_independent() {
            let empty = [];
            Some(cfg.rule.rank(&fixed_costs, &CostColumn::new(&empty, 1).expect("empty column")))
        } else {
            None
        };
        let cache_on_first_use = cached.is_none() && header.cost_regime == CostRegime::TimeInvariant;
        GpgPolicy { cfg, fixed_costs, cached, cache_on_first_use, gate_rng: Stream::substream(seed, tag::GATE) }
    }

    pub fn config(&self) -> &GpgConfig {
        &self.cfg
    }
}

impl Policy for GpgPolicy {
    fn id(&self) -> &str {
        &self.cfg.name
    }

    fn decide(&mut self, view: &PeriodView<'_>) -> Result<Decision> {
        let order = view.order;
        let dcs = self.fixed_costs.len();
        let draw = match self.cfg.gate {
            GatingCondition::RandomizedCostComparison { .. } => Some(self.gate_rng.next_f64()),
            _ => None,
        };
        if order.iter().all(|&q| q == 0) {
            return Ok(Decision { plan: FulfillmentPlan::zero(dcs, order.len()), gated: false, repaired: false });
        }
        if self.cached.is_none() && self.cache_on_first_use {
            self.cached = Some(self.cfg.rule.rank(&self.fixed_costs, &view.costs));
        }
        let computed;
        let ranking = match &self.cached {
            Some(r) => r,
            None => {
                computed = self.cfg.rule.rank(&self.fixed_costs, &view.costs);
                &computed
            }
        };
        let greedy = greedy_plan(order, view.inventory, ranking);
        let fire = match self.cfg.gate {
            GatingCondition::None => false,
            GatingCondition::OrderSize { theta } => gate_order_size(order, theta),
            GatingCondition::SmallOrder { theta } => gate_small_order(order, theta),
            GatingCondition::CostComparison => gate_cost_comparison(&greedy, &self.fixed_costs, &view.costs, order),
            GatingCondition::RandomizedCostComparison { f0, f1 } => {
                let x: f64 = greedy
                    .lines()
                    .iter()
                    .filter(|s| s.dc == 1)
                    .map(|s| (view.costs.get(0, s.item) - view.costs.get(1, s.item)) * s.quantity as f64)
                    .sum();
                let p = randomized_gate_probability(x.max(0.0), f0, f1)?;
                draw.expect("one draw per period") < p
            }
        };
        let (plan, gated) = match (fire, self.cfg.target) {
            (false, _) => (greedy, false),
            (true, GateTarget::Rdc) => (FulfillmentPlan::single_source(dcs, 0, order), true),
            (true, GateTarget::Fdc) => {
                let covered = order.iter().enumerate().all(|(i, &q)| view.inventory.level(1, i) >= q);
                if covered {
                    (FulfillmentPlan::single_source(dcs, 1, order), true)
                } else {
                    (greedy, false)
                }
            }
        };
        Ok(Decision { plan, gated, repaired: false })
    }
}
