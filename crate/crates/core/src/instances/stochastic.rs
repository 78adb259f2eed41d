use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::baselines::OrderTypeDistribution;
use crate::error::{config, Result};
use crate::model::{CostBounds, CostRegime, Instance, InstanceMeta};
use crate::rng::{tag, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StochasticConfig {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub f0: f64,
    /// Fixed cost of every FDC.
    pub f_fdc: f64,
    pub a: f64,
    pub b: f64,
    pub order_sizes: Vec<usize>,
    /// Number of distinct order types of each size.
    pub type_counts: Vec<usize>,
    pub size_probs: Vec<f64>,
    /// Inventory scale.
    pub tau: f64,
    pub regime: CostRegime,
}

impl Default for StochasticConfig {
    fn default() -> Self {
        StochasticConfig {
            n: 50,
            k: 10,
            horizon: 2000,
            f0: 50.0,
            f_fdc: 5.0,
            a: 8.0,
            b: 30.0,
            order_sizes: vec![1, 2, 3, 10, 15, 20],
            type_counts: vec![50, 50, 30, 20, 20, 10],
            size_probs: vec![0.4, 0.2, 0.1, 0.1, 0.1, 0.1],
            tau: 0.2,
            regime: CostRegime::TimeVarying,
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for j in 0..k {
        r = r.saturating_mul((n - j) as u128) / (j as u128 + 1);
    }
    r
}

impl StochasticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.horizon == 0 {
            return Err(config("n and T must be positive"));
        }
        if self.order_sizes.is_empty()
            || self.order_sizes.len() != self.type_counts.len()
            || self.order_sizes.len() != self.size_probs.len()
        {
            return Err(config("order_sizes, type_counts and size_probs must be nonempty and equally long"));
        }
        if let Some(&s) = self.order_sizes.iter().find(|&&s| s == 0 || s > self.n) {
            return Err(config(format!("order size {s} is outside 1..={}", self.n)));
        }
        if self.type_counts.iter().any(|&c| c == 0) {
            return Err(config("every order size needs at least one type"));
        }
        if self.size_probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(config("size probabilities must be nonnegative"));
        }
        let total: f64 = self.size_probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(config(format!("size probabilities sum to {total}, not 1")));
        }
        if !(self.a > 0.0 && self.a <= self.b && self.b.is_finite()) {
            return Err(config(format!("need 0 < a <= b, got a = {}, b = {}", self.a, self.b)));
        }
        if !(self.f0 >= 0.0 && self.f_fdc >= 0.0 && self.f0.is_finite() && self.f_fdc.is_finite()) {
            return Err(config("fixed costs must be finite and nonnegative"));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(config("tau must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Expected number of items per order.
    pub fn mean_order_size(&self) -> f64 {
        self.order_sizes.iter().zip(&self.size_probs).map(|(&s, &p)| s as f64 * p).sum()
    }

    /// The order types, grouped by size in config order, with their arrival probabilities.
    ///
    /// Items are dealt to types in chunks of successive shuffles of `0..n`. A chunk
    /// repeating an earlier type is redrawn unless every subset of that size is
    /// already taken, in which case the repeat is kept as a separate indexed type.
    pub fn order_types(&self, seed: u64) -> Result<OrderTypeDistribution> {
        self.validate()?;
        let mut rng = Stream::substream(seed, tag::INSTANCE_TYPES);
        let mut types = Vec::new();
        let mut probabilities = Vec::new();
        for ((&size, &count), &p) in self.order_sizes.iter().zip(&self.type_counts).zip(&self.size_probs) {
            let available = binomial(self.n, size);
            let mut seen = HashSet::new();
            let mut pool: Vec<usize> = Vec::new();
            let mut made = 0;
            while made < count {
                if pool.len() < size {
                    pool = (0..self.n).collect();
                    rng.shuffle(&mut pool);
                }
                let mut chunk: Vec<usize> = pool.drain(..size).collect();
                chunk.sort_unstable();
                if seen.contains(&chunk) && (seen.len() as u128) < available {
                    continue;
                }
                seen.insert(chunk.clone());
                types.push(chunk);
                probabilities.push(p / count as f64);
                made += 1;
            }
        }
        Ok(OrderTypeDistribution { types, probabilities })
    }
}

/// Per-item probability of appearing in an order.
pub fn item_probabilities(dist: &OrderTypeDistribution, n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n];
    for (q, &lambda) in dist.types.iter().zip(&dist.probabilities) {
        for &i in q {
            p[i] += lambda;
        }
    }
    p
}

/// Draws one instance: order types, costs, inventories and orders each come
/// from their own substream of `seed`.
pub fn gen_stochastic(cfg: &StochasticConfig, seed: u64) -> Result<Instance> {
    let dist = cfg.order_types(seed)?;
    let (n, k, horizon) = (cfg.n, cfg.k, cfg.horizon);
    let dcs = k + 1;

    let mut cost_rng = Stream::substream(seed, tag::INSTANCE_COSTS);
    let costs = match cfg.regime {
        CostRegime::TimeVarying => (0..horizon * dcs * n).map(|_| cost_rng.uniform(cfg.a, cfg.b)).collect(),
        CostRegime::TimeInvariant => {
            let column: Vec<f64> = (0..dcs * n).map(|_| cost_rng.uniform(cfg.a, cfg.b)).collect();
            column.repeat(horizon)
        }
    };

    let p = item_probabilities(&dist, n);
    let inventory: Vec<i64> = if k == 0 {
        Vec::new()
    } else {
        let per_fdc: Vec<i64> =
            p.iter().map(|&pi| (cfg.tau * pi * horizon as f64 / k as f64 + 0.5).floor() as i64).collect();
        per_fdc.repeat(k)
    };

    // types are grouped by size, so a size index maps to a contiguous range
    let mut starts = Vec::with_capacity(cfg.type_counts.len());
    let mut acc = 0;
    for &c in &cfg.type_counts {
        starts.push(acc);
        acc += c;
    }
    let mut order_rng = Stream::substream(seed, tag::INSTANCE_ORDERS);
    let mut orders = vec![0i64; horizon * n];
    for t in 0..horizon {
        let s = order_rng.categorical(&cfg.size_probs);
        let q = starts[s] + order_rng.below(cfg.type_counts[s] as u64) as usize;
        for &i in &dist.types[q] {
            orders[t * n + i] = 1;
        }
    }

    let fixed = std::iter::once(cfg.f0).chain(std::iter::repeat(cfg.f_fdc).take(k)).collect();
    let meta = InstanceMeta {
        family: "stochastic".to_string(),
        params: Some(serde_json::json!({ "config": cfg, "seed": seed })),
        order_types: Some(dist),
        ..Default::default()
    };
    Ok(Instance::new(n, k, horizon, fixed, costs, inventory, orders, cfg.regime, Some(CostBounds { a: cfg.a, b: cfg.b }))?
        .with_meta(meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    fn small() -> StochasticConfig {
        StochasticConfig { horizon: 200, k: 3, ..Default::default() }
    }

    #[test]
    fn default_mean_order_size() {
        assert!((StochasticConfig::default().mean_order_size() - 5.6).abs() < 1e-12);
    }

    #[test]
    fn generated_instance_is_valid() {
        let inst = gen_stochastic(&small(), 7).unwrap();
        assert!(validate_instance(&inst).is_empty());
        assert!(inst.costs.iter().all(|&c| (8.0..=30.0).contains(&c)));
        let p = item_probabilities(inst.meta.order_types.as_ref().unwrap(), inst.n);
        assert!((p.iter().sum::<f64>() - 5.6).abs() < 1e-9);
    }

    #[test]
    fn type_sets_are_distinct_per_size() {
        let d = small().order_types(3).unwrap();
        assert_eq!(d.types.len(), 180);
        let set: HashSet<_> = d.types.iter().collect();
        assert_eq!(set.len(), 180);
        assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_scale_means_empty_fdcs() {
        let inst = gen_stochastic(&StochasticConfig { tau: 0.0, ..small() }, 1).unwrap();
        assert!(inst.initial_inventory.iter().all(|&q| q == 0));
    }

    #[test]
    fn same_seed_same_instance() {
        assert_eq!(gen_stochastic(&small(), 11).unwrap(), gen_stochastic(&small(), 11).unwrap());
        assert_ne!(gen_stochastic(&small(), 11).unwrap().orders, gen_stochastic(&small(), 12).unwrap().orders);
    }

    #[test]
    fn invariant_costs_repeat() {
        let inst = gen_stochastic(&StochasticConfig { regime: CostRegime::TimeInvariant, ..small() }, 5).unwrap();
        assert_eq!(inst.cost_column(0).values(), inst.cost_column(199).values());
    }

    #[test]
    fn exhausted_subsets_repeat_instead_of_failing() {
        let cfg = StochasticConfig {
            n: 2,
            k: 1,
            horizon: 5,
            order_sizes: vec![1, 2],
            type_counts: vec![3, 2],
            size_probs: vec![0.5, 0.5],
            ..Default::default()
        };
        let d = cfg.order_types(0).unwrap();
        assert_eq!(d.types.len(), 5);
    }
}
