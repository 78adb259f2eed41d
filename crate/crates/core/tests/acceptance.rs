//! One test per acceptance criterion. Each prints a single PASS/FAIL line.
//!
//! Suites run one at a time: several of them time policies, and running them
//! side by side on a small machine would measure contention instead.

use std::io::Write;
use std::sync::Mutex;

use fulfillment::bench::{run_suite, SuiteId, DEFAULT_SEED};

static SERIAL: Mutex<()> = Mutex::new(());

fn check(id: SuiteId) {
    let _turn = SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
    let report = run_suite(id, DEFAULT_SEED);
    // Bypasses the harness's output capture so every verdict shows up.
    writeln!(std::io::stdout().lock(), "{report}").unwrap();
    for line in &report.details {
        println!("    {line}");
    }
    assert!(report.passed, "{report}");
}

#[test]
fn greedy_trap() {
    check(SuiteId::GreedyTrap);
}

#[test]
fn prefix_dominance() {
    check(SuiteId::PrefixDominance);
}

#[test]
fn order_size_f_priority_bound() {
    check(SuiteId::OrderSizeFPriorityBound);
}

#[test]
fn cost_comparison_v_priority_bound() {
    check(SuiteId::CostComparisonVPriorityBound);
}

#[test]
fn cost_comparison_adjv_priority_bound() {
    check(SuiteId::CostComparisonAdjvPriorityBound);
}

#[test]
fn randomized_bound() {
    check(SuiteId::RandomizedBound);
}

#[test]
fn oracle_cross_check() {
    check(SuiteId::OracleCrossCheck);
}

#[test]
fn stress() {
    check(SuiteId::Stress);
}

#[test]
fn bound_grids() {
    check(SuiteId::BoundGrids);
}

#[test]
fn stochastic_ordering() {
    check(SuiteId::StochasticOrdering);
}

#[test]
fn lp_sanity() {
    check(SuiteId::LpSanity);
}

#[test]
fn service_equivalence() {
    check(SuiteId::ServiceEquivalence);
}
