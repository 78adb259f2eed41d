//! Streaming decision service: one JSON object per line in, one per line out.
//!
//! Requests carry `"v": 1` and an `"op"` of `open`, `decide`, `state` or
//! `close`. An optional `"id"` is echoed back. Rejected requests never touch
//! session state.

mod transport;

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{period_cost, CostColumn, CostRegime, FulfillmentPlan, InventoryState};
use crate::policy::{build_policy, InstanceHeader, PeriodView, Policy, PolicySpec};

pub use transport::{serve_lines, serve_unix};

pub const PROTOCOL_VERSION: u64 = 1;

/// Machine-readable error codes.
pub mod code {
    pub const NO_SESSION: &str = "no_session";
    pub const BAD_ORDER: &str = "bad_order";
    pub const BAD_COSTS: &str = "bad_costs";
    pub const BAD_REQUEST: &str = "bad_request";
    pub const BAD_CONFIG: &str = "bad_config";
    pub const INTERNAL: &str = "internal";
}

/// A rejected request: one of the [`code`] constants and a message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reject {
    pub code: &'static str,
    pub message: String,
}

impl std::fmt::Display for Reject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

fn reject(code: &'static str, message: impl Into<String>) -> Reject {
    Reject { code, message: message.into() }
}

/// Outcome of one accepted decision.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub period: usize,
    pub plan: FulfillmentPlan,
    pub period_cost: f64,
    pub gated: bool,
    pub repaired: bool,
}

pub struct Session {
    pub header: InstanceHeader,
    pub spec: PolicySpec,
    pub seed: u64,
    policy: Box<dyn Policy>,
    inventory: InventoryState,
    first_costs: Option<Vec<f64>>,
    cumulative_cost: f64,
    gated_periods: usize,
    repaired_periods: usize,
}

impl Session {
    pub fn open(spec: PolicySpec, header: InstanceHeader, seed: u64) -> Result<Self> {
        let policy = build_policy(&spec, &header, seed)?;
        let inventory = InventoryState::new(header.k, header.n, header.inventory.clone());
        Ok(Session {
            header,
            spec,
            seed,
            policy,
            inventory,
            first_costs: None,
            cumulative_cost: 0.0,
            gated_periods: 0,
            repaired_periods: 0,
        })
    }

    pub fn period(&self) -> usize {
        self.inventory.period()
    }

    pub fn cumulative_cost(&self) -> f64 {
        self.cumulative_cost
    }

    pub fn inventory(&self) -> &InventoryState {
        &self.inventory
    }

    fn check_order(&self, order: &[i64]) -> std::result::Result<(), Reject> {
        if order.len() != self.header.n {
            return Err(reject(code::BAD_ORDER, format!("order has {} entries, expected {}", order.len(), self.header.n)));
        }
        if let Some(i) = order.iter().position(|&q| q < 0) {
            return Err(reject(code::BAD_ORDER, format!("negative quantity at item {i}")));
        }
        Ok(())
    }

    fn check_costs(&self, flat: &[f64]) -> std::result::Result<(), Reject> {
        let (dcs, n) = (self.header.dcs(), self.header.n);
        if flat.len() != dcs * n {
            return Err(reject(code::BAD_COSTS, format!("costs must be {dcs} rows of {n}")));
        }
        if let Some(j) = flat.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(reject(code::BAD_COSTS, format!("cost at dc {} item {} is negative or not finite", j / n, j % n)));
        }
        if let Some(cb) = self.header.cost_bounds {
            if let Some(j) = flat.iter().position(|&c| c < cb.a || c > cb.b) {
                return Err(reject(
                    code::BAD_COSTS,
                    format!("cost {} at dc {} item {} is outside [{}, {}]", flat[j], j / n, j % n, cb.a, cb.b),
                ));
            }
        }
        if self.header.cost_regime == CostRegime::TimeInvariant {
            if let Some(first) = &self.first_costs {
                if first.as_slice() != flat {
                    return Err(reject(code::BAD_COSTS, "time-invariant session received different costs"));
                }
            }
        }
        Ok(())
    }

    /// Validates, decides, applies. Nothing changes unless the whole step
    /// succeeds. `costs` is the period's column, DC-major (`[k][i]`).
    pub fn step(&mut self, order: &[i64], costs: &[f64]) -> std::result::Result<Step, Reject> {
        self.check_order(order)?;
        self.check_costs(costs)?;
        let column = CostColumn::new(costs, self.header.n).map_err(|e| reject(code::BAD_COSTS, e.to_string()))?;
        let period = self.inventory.period();
        let view = PeriodView { period, order, costs: column, inventory: &self.inventory };
        let decision = self.policy.decide(&view).map_err(|e| reject(code::INTERNAL, e.to_string()))?;
        let cost = period_cost(&decision.plan, &self.header.fixed_costs, &column)
            .map_err(|e| reject(code::INTERNAL, e.to_string()))?;
        self.inventory.apply(&decision.plan, order).map_err(|e| reject(code::INTERNAL, e.to_string()))?;
        if self.first_costs.is_none() {
            self.first_costs = Some(costs.to_vec());
        }
        self.cumulative_cost += cost;
        self.gated_periods += usize::from(decision.gated);
        self.repaired_periods += usize::from(decision.repaired);
        Ok(Step { period, plan: decision.plan, period_cost: cost, gated: decision.gated, repaired: decision.repaired })
    }

    fn decide(&mut self, order: &[i64], rows: &[Vec<f64>]) -> std::result::Result<Value, Reject> {
        let (dcs, n) = (self.header.dcs(), self.header.n);
        if rows.len() != dcs || rows.iter().any(|r| r.len() != n) {
            return Err(reject(code::BAD_COSTS, format!("costs must be {dcs} rows of {n}")));
        }
        let step = self.step(order, &rows.concat())?;
        Ok(json!({
            "period": step.period,
            "plan": step.plan.to_dense(),
            "period_cost": step.period_cost,
            "gated": step.gated,
            "repaired": step.repaired,
        }))
    }

    pub fn gated_periods(&self) -> usize {
        self.gated_periods
    }

    fn snapshot(&self) -> Value {
        json!({
            "period": self.inventory.period(),
            "inventory": self.inventory.to_rows(),
            "cumulative_cost": self.cumulative_cost,
        })
    }

    fn summary(&self) -> Value {
        json!({
            "policy_id": self.policy.id(),
            "seed": self.seed,
            "total_cost": self.cumulative_cost,
            "periods": self.inventory.period(),
            "gated_periods": self.gated_periods,
            "repaired_periods": self.repaired_periods,
            "inventory": self.inventory.to_rows(),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OpenArgs {
    policy: Value,
    header: InstanceHeader,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
struct DecideArgs {
    order: Vec<i64>,
    costs: Vec<Vec<f64>>,
}

/// Concurrent session store. Each session sits behind its own lock, so
/// requests for one session are handled strictly one at a time.
pub struct SessionStore {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
    journal: Option<Mutex<File>>,
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new()
    }
}

impl SessionStore {
    pub fn new() -> Self {
        SessionStore { sessions: Mutex::new(HashMap::new()), next_id: AtomicU64::new(1), journal: None }
    }

    /// A store that appends every request, with its response and a timestamp,
    /// to a JSON-lines journal.
    pub fn with_journal(path: impl AsRef<Path>) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(SessionStore { journal: Some(Mutex::new(file)), ..Self::new() })
    }

    /// Rebuilds state by re-handling every journaled request in order. Fails if
    /// a replayed response differs from the recorded one.
    pub fn replay(path: impl AsRef<Path>) -> Result<Self> {
        let store = Self::new();
        store.replay_into(path)?;
        Ok(store)
    }

    /// Replays a journal, then keeps appending to it.
    pub fn resume(path: impl AsRef<Path>) -> Result<Self> {
        let mut store = Self::new();
        if path.as_ref().exists() {
            store.replay_into(path.as_ref())?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        store.journal = Some(Mutex::new(file));
        Ok(store)
    }

    fn replay_into(&self, path: impl AsRef<Path>) -> Result<()> {
        let reader = BufReader::new(File::open(path)?);
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut entry: Value = serde_json::from_str(&line)
                .map_err(|e| Error::Parse { pointer: format!("/{lineno}"), message: e.to_string() })?;
            let obj = entry
                .as_object_mut()
                .ok_or_else(|| Error::Parse { pointer: format!("/{lineno}"), message: "journal entry is not an object".into() })?;
            obj.remove("ts");
            let recorded = obj.remove("response");
            let response = self.handle_value(entry);
            if let Some(recorded) = recorded {
                if recorded != response {
                    return Err(Error::Invariant(format!("journal line {lineno} replays to a different response")));
                }
            }
        }
        Ok(())
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session map lock").len()
    }

    fn session(&self, args: &Value) -> std::result::Result<Arc<Mutex<Session>>, Reject> {
        let id = args
            .get("session")
            .and_then(Value::as_str)
            .ok_or_else(|| reject(code::BAD_REQUEST, "missing string field \"session\""))?;
        self.sessions
            .lock()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| reject(code::NO_SESSION, format!("unknown session {id}")))
    }

    fn dispatch(&self, op: &str, msg: &Value) -> std::result::Result<Value, Reject> {
        match op {
            "open" => {
                let mut args = msg.clone();
                if let Some(obj) = args.as_object_mut() {
                    for k in ["v", "op", "id"] {
                        obj.remove(k);
                    }
                }
                let args: OpenArgs =
                    serde_json::from_value(args).map_err(|e| reject(code::BAD_REQUEST, e.to_string()))?;
                let spec: PolicySpec = match &args.policy {
                    Value::String(s) => s.parse().map_err(|e: Error| reject(code::BAD_CONFIG, e.to_string()))?,
                    other => serde_json::from_value(other.clone()).map_err(|e| reject(code::BAD_CONFIG, e.to_string()))?,
                };
                let session = Session::open(spec, args.header, args.seed).map_err(|e| reject(code::BAD_CONFIG, e.to_string()))?;
                let id = format!("s{}", self.next_id.fetch_add(1, Ordering::SeqCst));
                self.sessions.lock().expect("session map lock").insert(id.clone(), Arc::new(Mutex::new(session)));
                Ok(json!({ "session_id": id }))
            }
            "decide" => {
                let handle = self.session(msg)?;
                let order: Vec<i64> = match msg.get("order") {
                    Some(v) => serde_json::from_value(v.clone()).map_err(|e| reject(code::BAD_ORDER, e.to_string()))?,
                    None => return Err(reject(code::BAD_ORDER, "missing field \"order\"")),
                };
                let costs: Vec<Vec<f64>> = match msg.get("costs") {
                    Some(v) => serde_json::from_value(v.clone()).map_err(|e| reject(code::BAD_COSTS, e.to_string()))?,
                    None => return Err(reject(code::BAD_COSTS, "missing field \"costs\"")),
                };
                let args = DecideArgs { order, costs };
                let mut session = handle.lock().expect("session lock");
                session.decide(&args.order, &args.costs)
            }
            "state" => {
                let handle = self.session(msg)?;
                let session = handle.lock().expect("session lock");
                Ok(session.snapshot())
            }
            "close" => {
                let handle = self.session(msg)?;
                let id = msg["session"].as_str().expect("checked above").to_string();
                let summary = handle.lock().expect("session lock").summary();
                self.sessions.lock().expect("session map lock").remove(&id);
                Ok(summary)
            }
            other => Err(reject(code::BAD_REQUEST, format!("unknown op {other:?}"))),
        }
    }

    fn handle_value(&self, msg: Value) -> Value {
        let id = msg.get("id").cloned();
        let outcome = match msg.get("v").and_then(Value::as_u64) {
            Some(PROTOCOL_VERSION) => match msg.get("op").and_then(Value::as_str) {
                Some(op) => self.dispatch(op, &msg),
                None => Err(reject(code::BAD_REQUEST, "missing string field \"op\"")),
            },
            Some(v) => Err(reject(code::BAD_REQUEST, format!("unsupported protocol version {v}"))),
            None => Err(reject(code::BAD_REQUEST, "missing protocol version field \"v\"")),
        };
        let mut response = match outcome {
            Ok(Value::Object(mut body)) => {
                body.insert("v".into(), json!(PROTOCOL_VERSION));
                body.insert("ok".into(), json!(true));
                Value::Object(body)
            }
            Ok(other) => json!({ "v": PROTOCOL_VERSION, "ok": true, "result": other }),
            Err(r) => json!({ "v": PROTOCOL_VERSION, "ok": false, "error": { "code": r.code, "message": r.message } }),
        };
        if let Some(id) = id {
            response["id"] = id;
        }
        response
    }

    /// Handles one request line and returns one response line (without newline).
    pub fn handle_message(&self, line: &str) -> String {
        let response = match serde_json::from_str::<Value>(line) {
            Ok(msg @ Value::Object(_)) => {
                let response = self.handle_value(msg.clone());
                if let Some(journal) = &self.journal {
                    let mut entry = msg;
                    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0);
                    entry["ts"] = json!(ts);
                    entry["response"] = response.clone();
                    let mut file = journal.lock().expect("journal lock");
                    if let Err(e) = writeln!(file, "{entry}").and_then(|_| file.flush()) {
                        log::error!("journal write failed: {e}");
                    }
                }
                response
            }
            Ok(_) => json!({ "v": PROTOCOL_VERSION, "ok": false, "error": { "code": code::BAD_REQUEST, "message": "request must be a JSON object" } }),
            Err(e) => json!({ "v": PROTOCOL_VERSION, "ok": false, "error": { "code": code::BAD_REQUEST, "message": e.to_string() } }),
        };
        response.to_string()
    }
}
