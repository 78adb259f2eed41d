//! JSON instance files.
//!
//! Costs are stored `[k][t][i]`, or `{"replicate": true, "values": [k][i]}`
//! when they do not depend on the period. Inventory is `[k-1][i]` under the key
//! `inventory` (`initial_inventory` is accepted on read), orders are `[t][i]`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use serde_path_to_error::Segment;

use crate::error::{Error, Result};
use crate::model::{CostBounds, CostRegime, Instance, InstanceMeta};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(default)]
    meta: InstanceMeta,
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "T")]
    horizon: usize,
    fixed_costs: Vec<f64>,
    cost_regime: CostRegime,
    #[serde(default)]
    cost_bounds: Option<CostBounds>,
    costs: Value,
    #[serde(alias = "initial_inventory")]
    inventory: Vec<Vec<u64>>,
    orders: Vec<Vec<u64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompactCosts {
    replicate: bool,
    values: Vec<Vec<f64>>,
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn pointer(prefix: &str, path: &serde_path_to_error::Path) -> String {
    let mut out = prefix.to_string();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&escape(key)),
            Segment::Enum { variant } => out.push_str(&escape(variant)),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn parse_err(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { pointer: pointer.into(), message: message.into() }
}

fn decode<T: DeserializeOwned>(prefix: &str, value: &Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let p = pointer(prefix, e.path());
        parse_err(p, e.into_inner().to_string())
    })
}

fn expect_len(pointer: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(parse_err(pointer, format!("expected {want} entries, found {got}")))
    }
}

fn flatten_counts(key: &str, rows: &[Vec<u64>], n: usize) -> Result<Vec<i64>> {
    let mut out = Vec::with_capacity(rows.len() * n);
    for (r, row) in rows.iter().enumerate() {
        expect_len(&format!("/{key}/{r}"), row.len(), n)?;
        for (i, &q) in row.iter().enumerate() {
            out.push(i64::try_from(q).map_err(|_| parse_err(format!("/{key}/{r}/{i}"), "quantity too large"))?);
        }
    }
    Ok(out)
}

/// Parses an instance from JSON text. Schema and shape errors carry the JSON
/// pointer of the offending value; value-range checks are left to
/// [`crate::model::validate_instance`].
pub fn parse_instance(text: &str) -> Result<Instance> {
    let raw: Value = serde_json::from_str(text).map_err(|e| parse_err("", e.to_string()))?;
    let inventory_key = if raw.get("initial_inventory").is_some() { "initial_inventory" } else { "inventory" };
    let file: InstanceFile = decode("", &raw)?;
    let (n, k, horizon) = (file.n, file.k, file.horizon);
    if n == 0 {
        return Err(parse_err("/n", "n must be positive"));
    }
    if horizon == 0 {
        return Err(parse_err("/T", "T must be positive"));
    }
    let dcs = k + 1;
    expect_len("/fixed_costs", file.fixed_costs.len(), dcs)?;

    let costs = if file.costs.is_object() {
        let compact: CompactCosts = decode("/costs", &file.costs)?;
        if !compact.replicate {
            return Err(parse_err("/costs/replicate", "compact costs must set replicate to true"));
        }
        expect_len("/costs/values", compact.values.len(), dcs)?;
        for (kk, row) in compact.values.iter().enumerate() {
            expect_len(&format!("/costs/values/{kk}"), row.len(), n)?;
        }
        let column: Vec<f64> = compact.values.concat();
        column.repeat(horizon)
    } else {
        let full: Vec<Vec<Vec<f64>>> = decode("/costs", &file.costs)?;
        expect_len("/costs", full.len(), dcs)?;
        for (kk, per_dc) in full.iter().enumerate() {
            expect_len(&format!("/costs/{kk}"), per_dc.len(), horizon)?;
            for (t, row) in per_dc.iter().enumerate() {
                expect_len(&format!("/costs/{kk}/{t}"), row.len(), n)?;
            }
        }
        let mut flat = Vec::with_capacity(horizon * dcs * n);
        for t in 0..horizon {
            for per_dc in &full {
                flat.extend_from_slice(&per_dc[t]);
            }
        }
        flat
    };

    expect_len(&format!("/{inventory_key}"), file.inventory.len(), k)?;
    let inventory = flatten_counts(inventory_key, &file.inventory, n)?;
    expect_len("/orders", file.orders.len(), horizon)?;
    let orders = flatten_counts("orders", &file.orders, n)?;

    Ok(Instance::new(n, k, horizon, file.fixed_costs, costs, inventory, orders, file.cost_regime, file.cost_bounds)?
        .with_meta(file.meta))
}

fn replicated(inst: &Instance) -> bool {
    let width = (inst.k + 1) * inst.n;
    let first = &inst.costs[..width];
    inst.costs.chunks(width).all(|c| c == first)
}

pub fn instance_to_json(inst: &Instance) -> Value {
    let (n, dcs) = (inst.n, inst.k + 1);
    let costs = if inst.regime == CostRegime::TimeInvariant && replicated(inst) {
        let values: Vec<&[f64]> = (0..dcs).map(|k| inst.cost_column(0).dc(k)).collect();
        json!({ "replicate": true, "values": values })
    } else {
        let full: Vec<Vec<&[f64]>> =
            (0..dcs).map(|k| (0..inst.horizon).map(|t| inst.cost_column(t).dc(k)).collect()).collect();
        json!(full)
    };
    let inventory: Vec<&[i64]> = inst.initial_inventory.chunks(n).collect();
    let orders: Vec<&[i64]> = inst.orders.chunks(n).collect();
    let mut v = json!({
        "meta": inst.meta,
        "n": n,
        "K": inst.k,
        "T": inst.horizon,
        "fixed_costs": inst.fixed_costs,
        "cost_regime": inst.regime,
        "costs": costs,
        "inventory": inventory,
        "orders": orders,
    });
    if let Some(cb) = inst.cost_bounds {
        v["cost_bounds"] = json!(cb);
    }
    v
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&instance_to_json(inst)).map_err(|e| Error::Structural(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&fs::read_to_string(path)?)
}

/// Serializes any value as pretty JSON followed by a newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable value") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::adversarial::{gen_adversarial, AdversarialParams};
    use crate::instances::stochastic::{gen_stochastic, StochasticConfig};

    #[test]
    fn round_trip_greedy_trap() {
        let inst = gen_adversarial(&AdversarialParams::GreedyTrap { m: 2 }).unwrap().remove(0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trap.json");
        write_instance(&inst, &path).unwrap();
        assert_eq!(read_instance(&path).unwrap(), inst);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"replicate\": true"));
    }

    #[test]
    fn round_trip_time_varying() {
        let cfg = StochasticConfig { n: 4, k: 2, horizon: 6, order_sizes: vec![1, 2], type_counts: vec![4, 3], size_probs: vec![0.5, 0.5], ..Default::default() };
        let inst = gen_stochastic(&cfg, 9).unwrap();
        let back = parse_instance(&instance_to_json(&inst).to_string()).unwrap();
        assert_eq!(back, inst);
    }

    fn base() -> Value {
        json!({
            "n": 3, "K": 1, "T": 1,
            "fixed_costs": [1.0, 0.0],
            "cost_regime": "time-invariant",
            "costs": {"replicate": true, "values": [[1.0, 2.0, 3.0], [0.5, 0.5, 0.5]]},
            "initial_inventory": [[1, 1, 1]],
            "orders": [[1, 0, 1]]
        })
    }

    #[test]
    fn compact_costs_expand() {
        let inst = parse_instance(&base().to_string()).unwrap();
        assert_eq!(inst.cost(0, 0, 2), 3.0);
        assert_eq!(inst.cost(1, 0, 1), 0.5);
        assert_eq!(inst.initial_inventory, vec![1, 1, 1]);
    }

    #[test]
    fn negative_inventory_points_at_entry() {
        let mut v = base();
        v["initial_inventory"][0][2] = json!(-1);
        match parse_instance(&v.to_string()) {
            Err(Error::Parse { pointer, .. }) => assert_eq!(pointer, "/initial_inventory/0/2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_row_length_points_at_row() {
        let mut v = base();
        v["orders"][0] = json!([1, 1]);
        match parse_instance(&v.to_string()) {
            Err(Error::Parse { pointer, .. }) => assert_eq!(pointer, "/orders/0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_cost_type_points_into_costs() {
        let mut v = base();
        v["costs"]["values"][1][0] = json!("x");
        match parse_instance(&v.to_string()) {
            Err(Error::Parse { pointer, .. }) => assert_eq!(pointer, "/costs/values/1/0"),
            other => panic!("{other:?}"),
        }
    }
}
