use std::ffi::{CStr, CString};
use std::ptr;

use fulfillment::bench::tiny::{tiny_instance, TinyShape};
use fulfillment::instances::instance_to_json;
use fulfillment::rng::Stream;
use fulfillment::{CostRegime, Instance};
use fulfillment_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = ff_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(inst: &Instance) -> *mut FfInstance {
    let json = c(&instance_to_json(inst).to_string());
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ff_instance_parse(json.as_ptr(), &mut h) }, FfStatus::Ok);
    h
}

fn flat_costs(inst: &Instance, t: usize) -> Vec<f64> {
    let col = inst.cost_column(t);
    (0..inst.dcs()).flat_map(|k| col.dc(k).to_vec()).collect()
}

#[test]
fn session_replays_batch_runs() {
    let mut rng = Stream::new(11);
    let policies = ["order-size-f-priority", "cost-comparison-v-priority", "pure-greedy", "myopic"];
    for round in 0..40 {
        let regime = if round % 2 == 0 { CostRegime::TimeInvariant } else { CostRegime::TimeVarying };
        let inst = tiny_instance(&mut rng, &TinyShape { regime, ..TinyShape::default() });
        let handle = load(&inst);
        for name in policies {
            let policy = c(name);
            let mut batch = f64::NAN;
            let status = unsafe { ff_run_policy(handle, policy.as_ptr(), 3, &mut batch, ptr::null_mut()) };
            if status == FfStatus::Config {
                continue;
            }
            assert_eq!(status, FfStatus::Ok, "{}", last_error());

            let mut session = ptr::null_mut();
            assert_eq!(unsafe { ff_session_open_for(handle, policy.as_ptr(), 3, &mut session) }, FfStatus::Ok);
            let mut plan = vec![0i64; inst.dcs() * inst.n];
            for t in 0..inst.horizon {
                let order = inst.order(t);
                let costs = flat_costs(&inst, t);
                let status = unsafe {
                    ff_session_decide(
                        session,
                        order.as_ptr(),
                        order.len(),
                        costs.as_ptr(),
                        costs.len(),
                        plan.as_mut_ptr(),
                        plan.len(),
                        ptr::null_mut(),
                        ptr::null_mut(),
                    )
                };
                assert_eq!(status, FfStatus::Ok, "{}", last_error());
                for i in 0..inst.n {
                    let shipped: i64 = (0..inst.dcs()).map(|k| plan[k * inst.n + i]).sum();
                    assert_eq!(shipped, order[i]);
                }
            }
            let (mut periods, mut total) = (0usize, f64::NAN);
            assert_eq!(unsafe { ff_session_state(session, &mut periods, &mut total) }, FfStatus::Ok);
            assert_eq!(periods, inst.horizon);
            assert!((total - batch).abs() <= 1e-9 * batch.max(1.0), "{name}: {total} vs {batch}");
            unsafe { ff_session_free(session) };
        }
        unsafe { ff_instance_free(handle) };
    }
}

#[test]
fn rejected_periods_leave_the_session_alone() {
    let mut rng = Stream::new(2);
    let inst = tiny_instance(&mut rng, &TinyShape { k_min: 1, ..TinyShape::default() });
    let handle = load(&inst);
    let policy = c("pure-greedy");
    let mut session = ptr::null_mut();
    assert_eq!(unsafe { ff_session_open_for(handle, policy.as_ptr(), 0, &mut session) }, FfStatus::Ok);
    let mut plan = vec![0i64; inst.dcs() * inst.n];
    let costs = flat_costs(&inst, 0);

    let negative = vec![-1i64; inst.n];
    let status = unsafe {
        ff_session_decide(session, negative.as_ptr(), inst.n, costs.as_ptr(), costs.len(), plan.as_mut_ptr(), plan.len(), ptr::null_mut(), ptr::null_mut())
    };
    assert_eq!(status, FfStatus::BadOrder);
    assert!(last_error().contains("bad_order"));

    let order = inst.order(0);
    let status = unsafe {
        ff_session_decide(session, order.as_ptr(), inst.n, costs.as_ptr(), costs.len() - 1, plan.as_mut_ptr(), plan.len(), ptr::null_mut(), ptr::null_mut())
    };
    assert_eq!(status, FfStatus::BadCosts);

    let status = unsafe {
        ff_session_decide(session, order.as_ptr(), inst.n, costs.as_ptr(), costs.len(), plan.as_mut_ptr(), plan.len() - 1, ptr::null_mut(), ptr::null_mut())
    };
    assert_eq!(status, FfStatus::BufferTooSmall);

    let mut periods = 99usize;
    assert_eq!(unsafe { ff_session_state(session, &mut periods, ptr::null_mut()) }, FfStatus::Ok);
    assert_eq!(periods, 0);
    for fdc in 1..=inst.k {
        for item in 0..inst.n {
            let mut level = -1;
            assert_eq!(unsafe { ff_session_stock(session, fdc, item, &mut level) }, FfStatus::Ok);
            assert_eq!(level, inst.initial_inventory[(fdc - 1) * inst.n + item]);
        }
    }
    let mut level = 0;
    assert_eq!(unsafe { ff_session_stock(session, 0, 0, &mut level) }, FfStatus::Domain);
    unsafe {
        ff_session_free(session);
        ff_instance_free(handle);
    }
}

#[test]
fn bad_inputs_map_to_status_codes() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ff_instance_parse(ptr::null(), &mut h) }, FfStatus::NullArgument);
    assert!(h.is_null());
    let junk = c("{not json");
    assert_eq!(unsafe { ff_instance_parse(junk.as_ptr(), &mut h) }, FfStatus::Parse);
    assert!(!last_error().is_empty());
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { ff_instance_parse(bad.as_ptr().cast(), &mut h) }, FfStatus::InvalidUtf8);

    let mut rng = Stream::new(4);
    let inst = tiny_instance(&mut rng, &TinyShape::default());
    let handle = load(&inst);
    let unknown = c("no-such-policy");
    let mut cost = 0.0;
    let status = unsafe { ff_run_policy(handle, unknown.as_ptr(), 0, &mut cost, ptr::null_mut()) };
    assert_ne!(status, FfStatus::Ok);
    assert_eq!(unsafe { ff_optimal_cost(handle, 1, &mut cost) }, FfStatus::StateSpace);
    unsafe { ff_instance_free(handle) };

    unsafe {
        ff_instance_free(ptr::null_mut());
        ff_session_free(ptr::null_mut());
        ff_service_free(ptr::null_mut());
        ff_string_free(ptr::null_mut());
    }
}

#[test]
fn optimum_never_exceeds_a_policy_run() {
    let mut rng = Stream::new(8);
    for _ in 0..20 {
        let inst = tiny_instance(&mut rng, &TinyShape::default());
        let handle = load(&inst);
        let policy = c("myopic");
        let (mut opt, mut alg) = (f64::NAN, f64::NAN);
        assert_eq!(unsafe { ff_optimal_cost(handle, 0, &mut opt) }, FfStatus::Ok, "{}", last_error());
        assert_eq!(unsafe { ff_run_policy(handle, policy.as_ptr(), 0, &mut alg, ptr::null_mut()) }, FfStatus::Ok);
        assert!(opt <= alg + 1e-9, "{opt} > {alg}");
        unsafe { ff_instance_free(handle) };
    }
}

#[test]
fn bounds_by_name() {
    let name = c("cost-comparison-v-priority-upper");
    let fdc = [2.0, 3.0];
    let mut v = f64::NAN;
    let status = unsafe { ff_bound_value(name.as_ptr(), 10.0, fdc.as_ptr(), fdc.len(), 1.0, 2.0, f64::NAN, &mut v) };
    assert_eq!(status, FfStatus::Ok, "{}", last_error());
    assert!(v.is_finite() && v >= 1.0);

    let missing = c("not-a-bound");
    assert_eq!(
        unsafe { ff_bound_value(missing.as_ptr(), 10.0, fdc.as_ptr(), 2, 1.0, 2.0, f64::NAN, &mut v) },
        FfStatus::Config
    );
}

#[test]
fn service_round_trip() {
    let mut svc = ptr::null_mut();
    assert_eq!(unsafe { ff_service_new(ptr::null(), &mut svc) }, FfStatus::Ok);
    let open = c(r#"{"v":1,"id":7,"op":"open","policy":"pure-greedy","seed":1,
        "header":{"n":1,"K":1,"fixed_costs":[5.0,1.0],"cost_regime":"time-varying","inventory":[1]}}"#);
    let mut resp = ptr::null_mut();
    assert_eq!(unsafe { ff_service_handle(svc, open.as_ptr(), &mut resp) }, FfStatus::Ok);
    let reply: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(resp) }.to_str().unwrap()).unwrap();
    unsafe { ff_string_free(resp) };
    assert_eq!(reply["id"], 7);
    assert_eq!(reply["ok"], true, "{reply}");

    let garbage = c("not json");
    assert_eq!(unsafe { ff_service_handle(svc, garbage.as_ptr(), &mut resp) }, FfStatus::Ok);
    let reply: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(resp) }.to_str().unwrap()).unwrap();
    unsafe { ff_string_free(resp) };
    assert_eq!(reply["ok"], false);
    unsafe { ff_service_free(svc) };
}

#[test]
fn abi_version_matches_header() {
    let header = include_str!("../include/fulfillment.h");
    assert_eq!(ff_abi_version(), FF_ABI_VERSION);
    assert!(header.contains(&format!("#define FF_ABI_VERSION {FF_ABI_VERSION}")));
    for name in ["ff_instance_parse", "ff_session_decide", "ff_service_handle", "ff_last_error", "ff_string_free"] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
