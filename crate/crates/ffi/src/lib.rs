//! C ABI over the fulfillment engine.
//!
//! Every handle is opaque and owned by the caller until passed to its `_free`
//! function. Functions return an [`FfStatus`]; on anything but `FF_STATUS_OK`
//! the thread's last error message is available from [`ff_last_error`].
//! Output pointers are left untouched on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fulfillment::oracle::{bound_value, bruteforce_opt, BoundId, BoundInputs, SearchLimits};
use fulfillment::service::{code, Reject, Session, SessionStore};
use fulfillment::{instances, run_policy, Error, Instance, InstanceHeader, PolicySpec};

/// Bumped on any incompatible change to the exported functions.
pub const FF_ABI_VERSION: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInstance = 4,
    Config = 5,
    Domain = 6,
    Infeasible = 7,
    StateSpace = 8,
    Solver = 9,
    Unsupported = 10,
    Io = 11,
    BadOrder = 12,
    BadCosts = 13,
    BufferTooSmall = 14,
    Internal = 15,
    Panic = 16,
}

/// A loaded problem instance.
pub struct FfInstance(Instance);

/// One online policy run, fed one period at a time.
pub struct FfSession(Session);

/// A multi-session store speaking the line-delimited JSON protocol.
pub struct FfService(SessionStore);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Structural(_) => FfStatus::InvalidInstance,
            Error::InfeasiblePlan(_) => FfStatus::Infeasible,
            Error::Config(_) => FfStatus::Config,
            Error::Domain(_) => FfStatus::Domain,
            Error::StateSpace { .. } => FfStatus::StateSpace,
            Error::Lp(_) => FfStatus::Solver,
            Error::Unsupported(_) => FfStatus::Unsupported,
            Error::Parse { .. } => FfStatus::Parse,
            Error::Invariant(_) => FfStatus::Internal,
            Error::Io(_) => FfStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

impl From<Reject> for Failure {
    fn from(r: Reject) -> Self {
        let status = match r.code {
            code::BAD_ORDER => FfStatus::BadOrder,
            code::BAD_COSTS => FfStatus::BadCosts,
            _ => FfStatus::Internal,
        };
        Failure(status, r.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs were replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `body`, records any failure (including a panic) as the last error
/// and converts it to a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> FfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FfStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {message}"));
            FfStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FfStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(FfStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T) {
    if !out.is_null() {
        *out = value;
    }
}

fn parse_policy(text: &str) -> Result<PolicySpec, Failure> {
    text.parse::<PolicySpec>().map_err(Failure::from)
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs were replaced").into_raw()
}

#[no_mangle]
pub extern "C" fn ff_abi_version() -> u32 {
    FF_ABI_VERSION
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ff_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_instance_parse(json: *const c_char, out: *mut *mut FfInstance) -> FfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = instances::parse_instance(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(FfInstance(inst)));
        Ok(())
    })
}

/// Reads an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_instance_read(path: *const c_char, out: *mut *mut FfInstance) -> FfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = instances::read_instance(text(path, "path")?)?;
        *out = Box::into_raw(Box::new(FfInstance(inst)));
        Ok(())
    })
}

/// # Safety
/// `inst` must come from `ff_instance_parse`/`ff_instance_read` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ff_instance_free(inst: *mut FfInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Item count, FDC count (excluding the RDC) and horizon. Any output may be NULL.
///
/// # Safety
/// `inst` must be a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn ff_instance_dims(
    inst: *const FfInstance,
    n: *mut usize,
    k: *mut usize,
    horizon: *mut usize,
) -> FfStatus {
    guard(|| {
        let inst = &handle(inst, "inst")?.0;
        write(n, inst.n);
        write(k, inst.k);
        write(horizon, inst.horizon);
        Ok(())
    })
}

/// Runs a policy over the whole instance. `policy` is a policy name or a JSON
/// policy object. Either output may be NULL.
///
/// # Safety
/// `inst` must be a live handle and `policy` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ff_run_policy(
    inst: *const FfInstance,
    policy: *const c_char,
    seed: u64,
    total_cost: *mut f64,
    gated_periods: *mut usize,
) -> FfStatus {
    guard(|| {
        let inst = &handle(inst, "inst")?.0;
        let spec = parse_policy(text(policy, "policy")?)?;
        let run = run_policy(inst, &spec, seed)?;
        write(total_cost, run.total_cost);
        write(gated_periods, run.trace.iter().filter(|r| r.gated).count());
        Ok(())
    })
}

/// Clairvoyant optimum by exhaustive search. `max_states` of 0 keeps the
/// default limit; exceeding the limit returns `FF_STATUS_STATE_SPACE`.
///
/// # Safety
/// `inst` must be a live handle; `opt_cost` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_optimal_cost(inst: *const FfInstance, max_states: u64, opt_cost: *mut f64) -> FfStatus {
    guard(|| {
        let inst = &handle(inst, "inst")?.0;
        if opt_cost.is_null() {
            return Err(null("opt_cost"));
        }
        let mut limits = SearchLimits { want_plan: false, ..SearchLimits::default() };
        if max_states > 0 {
            limits.max_states = max_states;
        }
        *opt_cost = bruteforce_opt(inst, &limits)?.opt_cost;
        Ok(())
    })
}

/// Evaluates a named competitive-ratio bound, e.g. `"cost-comparison-v-priority-upper"`.
/// Pass NaN for `a`, `b` or `theta` to leave them unset.
///
/// # Safety
/// `bound` must be a NUL-terminated string and `fdc_fixed` must point to `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn ff_bound_value(
    bound: *const c_char,
    f0: f64,
    fdc_fixed: *const f64,
    k: usize,
    a: f64,
    b: f64,
    theta: f64,
    out: *mut f64,
) -> FfStatus {
    guard(|| {
        let name = text(bound, "bound")?;
        let id: BoundId = serde_json::from_value(serde_json::Value::String(name.into()))
            .map_err(|_| Failure(FfStatus::Config, format!("unknown bound {name:?}")))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut inputs = BoundInputs::new(f0, slice(fdc_fixed, k, "fdc_fixed")?);
        if !a.is_nan() {
            inputs.a = Some(a);
        }
        if !b.is_nan() {
            inputs.b = Some(b);
        }
        if !theta.is_nan() {
            inputs.theta = Some(theta);
        }
        *out = bound_value(id, &inputs)?;
        Ok(())
    })
}

fn open_session(header: InstanceHeader, policy: &str, seed: u64, out: *mut *mut FfSession) -> Result<(), Failure> {
    let session = Session::open(parse_policy(policy)?, header, seed)?;
    // SAFETY: callers check `out` for NULL first.
    unsafe { *out = Box::into_raw(Box::new(FfSession(session))) };
    Ok(())
}

/// Opens an online session from an instance header in JSON (no costs or orders).
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_session_open(
    header_json: *const c_char,
    policy: *const c_char,
    seed: u64,
    out: *mut *mut FfSession,
) -> FfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let header: InstanceHeader = serde_json::from_str(text(header_json, "header_json")?)
            .map_err(|e| Failure(FfStatus::Parse, e.to_string()))?;
        open_session(header, text(policy, "policy")?, seed, out)
    })
}

/// Opens an online session using an instance's header; its costs and orders
/// are not fed automatically.
///
/// # Safety
/// `inst` must be a live handle, `policy` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_session_open_for(
    inst: *const FfInstance,
    policy: *const c_char,
    seed: u64,
    out: *mut *mut FfSession,
) -> FfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let header = handle(inst, "inst")?.0.header();
        open_session(header, text(policy, "policy")?, seed, out)
    })
}

/// Decides and applies one period.
///
/// `order` holds `n` quantities. `costs` holds the period's variable costs as
/// `(k + 1) * n` doubles, RDC row first. The plan is written to `plan_out`
/// in the same layout; `plan_len` must be at least `(k + 1) * n`. A rejected
/// period leaves the session unchanged. `period_cost` and `gated` may be NULL.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ff_session_decide(
    session: *mut FfSession,
    order: *const i64,
    order_len: usize,
    costs: *const f64,
    costs_len: usize,
    plan_out: *mut i64,
    plan_len: usize,
    period_cost: *mut f64,
    gated: *mut bool,
) -> FfStatus {
    guard(|| {
        let session = &mut session.as_mut().ok_or_else(|| null("session"))?.0;
        let cells = session.header.dcs() * session.header.n;
        if plan_out.is_null() {
            return Err(null("plan_out"));
        }
        if plan_len < cells {
            return Err(Failure(FfStatus::BufferTooSmall, format!("plan_out holds {plan_len} entries, need {cells}")));
        }
        let step = session.step(slice(order, order_len, "order")?, slice(costs, costs_len, "costs")?)?;
        let dense = step.plan.to_dense();
        let out = std::slice::from_raw_parts_mut(plan_out, cells);
        for (dst, src) in out.iter_mut().zip(dense.iter().flatten()) {
            *dst = *src;
        }
        write(period_cost, step.period_cost);
        write(gated, step.gated);
        Ok(())
    })
}

/// Periods decided so far and their total cost. Either output may be NULL.
///
/// # Safety
/// `session` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_session_state(
    session: *const FfSession,
    periods: *mut usize,
    cumulative_cost: *mut f64,
) -> FfStatus {
    guard(|| {
        let session = &handle(session, "session")?.0;
        write(periods, session.period());
        write(cumulative_cost, session.cumulative_cost());
        Ok(())
    })
}

/// Remaining stock of `item` at FDC `fdc` (1-based; the RDC is 0 and unlimited).
///
/// # Safety
/// `session` must be a live handle; `level` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_session_stock(session: *const FfSession, fdc: usize, item: usize, level: *mut i64) -> FfStatus {
    guard(|| {
        let session = &handle(session, "session")?.0;
        let (k, n) = (session.header.k, session.header.n);
        if fdc == 0 || fdc > k || item >= n {
            return Err(Failure(FfStatus::Domain, format!("fdc must be in 1..={k} and item in 0..{n}")));
        }
        if level.is_null() {
            return Err(null("level"));
        }
        *level = session.inventory().level(fdc, item);
        Ok(())
    })
}

/// # Safety
/// `session` must come from `ff_session_open*` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ff_session_free(session: *mut FfSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Creates a protocol service. With a non-NULL `journal_path`, existing
/// journal entries are replayed and new requests are appended.
///
/// # Safety
/// `journal_path` must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_service_new(journal_path: *const c_char, out: *mut *mut FfService) -> FfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let store = if journal_path.is_null() {
            SessionStore::new()
        } else {
            SessionStore::resume(text(journal_path, "journal_path")?)?
        };
        *out = Box::into_raw(Box::new(FfService(store)));
        Ok(())
    })
}

/// Handles one request line and returns the response line, to be released
/// with `ff_string_free`. Protocol-level rejections are reported inside the
/// response, not through the status. Safe to call from several threads on
/// the same service.
///
/// # Safety
/// `service` must be live, `request` NUL-terminated, `response` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_service_handle(
    service: *const FfService,
    request: *const c_char,
    response: *mut *mut c_char,
) -> FfStatus {
    guard(|| {
        let store = &handle(service, "service")?.0;
        let line = text(request, "request")?;
        if response.is_null() {
            return Err(null("response"));
        }
        *response = into_c_string(store.handle_message(line));
        Ok(())
    })
}

/// # Safety
/// `service` must come from `ff_service_new` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ff_service_free(service: *mut FfService) {
    if !service.is_null() {
        drop(Box::from_raw(service));
    }
}
