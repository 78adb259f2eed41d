use std::fmt;

use thiserror::Error;

/// Which feasibility constraint a plan broke.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanViolation {
    Demand { item: usize, shipped: i64, ordered: i64 },
    Inventory { dc: usize, item: usize, shipped: i64, available: i64 },
    Negative { dc: usize, item: usize, quantity: i64 },
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanViolation::Demand { item, shipped, ordered } => {
                write!(f, "demand constraint at item {item}: shipped {shipped}, ordered {ordered}")
            }
            PlanViolation::Inventory { dc, item, shipped, available } => write!(
                f,
                "inventory constraint at dc {dc} item {item}: shipped {shipped}, available {available}"
            ),
            PlanViolation::Negative { dc, item, quantity } => {
                write!(f, "non-negativity constraint at dc {dc} item {item}: quantity {quantity}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("infeasible plan: {0}")]
    InfeasiblePlan(PlanViolation),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("state space exceeds limit of {limit} states")]
    StateSpace { limit: u64 },
    #[error("lp solver: {0}")]
    Lp(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },
    #[error("internal invariant failed: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
