//! C ABI for the bounded-concurrent ZK laboratory.
//!
//! Conventions: functions return a [`BczkLabStatus`] code; out-parameters
//! are written only on `Ok`. Handles are opaque and freed with their
//! dedicated `_free` function. Strings are UTF-8, NUL-terminated on the C
//! side; the last error message of the calling thread is available through
//! [`bczk_lab_last_error`]. The header `include/bczk_lab.h` is generated by
//! cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::path::Path;

use bczk_lab::exp::ExperimentConfig;
use bczk_lab::params::{self, ProtocolParams};
use bczk_lab::quantum::cloning::closed_form_delta;
use bczk_lab::soundness;
use bczk_lab::Error;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

/// Status codes for every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BczkLabStatus {
    Ok = 0,
    /// A pointer was null or an argument malformed.
    InvalidArgument = 1,
    /// A derived quantity does not fit the integer width in use.
    OutOfRange = 2,
    /// The experiment ran but at least one criterion failed.
    CriterionFailed = 3,
    /// Execution error (I/O, configuration, protocol).
    ExecutionError = 4,
    /// The caller's buffer was too small; required size is reported.
    BufferTooSmall = 5,
}

fn status_for(err: &Error) -> BczkLabStatus {
    match err {
        Error::OutOfRange(_) => BczkLabStatus::OutOfRange,
        Error::InvalidParams(_) | Error::Domain(_) | Error::LengthMismatch(_) => {
            BczkLabStatus::InvalidArgument
        }
        _ => BczkLabStatus::ExecutionError,
    }
}

/// Opaque parameter handle.
pub struct BczkLabParams {
    inner: ProtocolParams,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bczk_lab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf` (truncated if
/// needed) and reports the full length through `written`.
///
/// # Safety
/// `buf` must point to `cap` writable bytes; `written` must be valid or
/// null.
#[no_mangle]
pub unsafe extern "C" fn bczk_lab_last_error(
    buf: *mut c_char,
    cap: usize,
    written: *mut usize,
) {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !written.is_null() {
            *written = bytes.len() + 1;
        }
        if buf.is_null() || cap == 0 {
            return;
        }
        let n = bytes.len().min(cap - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
        *buf.add(n) = 0;
    });
}

/// Derives the polynomial-profile parameters for (q, lambda).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bczk_lab_params_derive(
    q: u64,
    lambda: u64,
    out: *mut *mut BczkLabParams,
) -> BczkLabStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return BczkLabStatus::InvalidArgument;
    }
    match params::derive_params(q, lambda) {
        Ok(p) => {
            *out = Box::into_raw(Box::new(BczkLabParams { inner: p }));
            BczkLabStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_for(&e)
        }
    }
}

/// Builds a desk-scale profile (slots/2 + gap threshold structure).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bczk_lab_params_desk(
    slots: u64,
    blocks: u64,
    gap: u64,
    q: u64,
    out: *mut *mut BczkLabParams,
) -> BczkLabStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return BczkLabStatus::InvalidArgument;
    }
    match params::desk_profile(slots, blocks, gap, q) {
        Ok(p) => {
            *out = Box::into_raw(Box::new(BczkLabParams { inner: p }));
            BczkLabStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_for(&e)
        }
    }
}

/// Frees a parameter handle. Null is a no-op.
///
/// # Safety
/// `p` must have come from a `bczk_lab_params_*` constructor and not have
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn bczk_lab_params_free(p: *mut BczkLabParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Reads one numeric field of a parameter handle. Keys: "q", "lambda",
/// "slots", "blocks", "block_len", "prot_len", "threshold".
///
/// # Safety
/// `p`, `key`, and `out` must be valid; `key` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn bczk_lab_params_get(
    p: *const BczkLabParams,
    key: *const c_char,
    out: *mut u64,
) -> BczkLabStatus {
    if p.is_null() || key.is_null() || out.is_null() {
        set_error("null pointer argument");
        return BczkLabStatus::InvalidArgument;
    }
    let Ok(key) = CStr::from_ptr(key).to_str() else {
        set_error("key is not UTF-8");
        return BczkLabStatus::InvalidArgument;
    };
    let inner = &(*p).inner;
    let value = match key {
        "q" => inner.q,
        "lambda" => inner.lambda,
        "slots" => inner.slots,
        "blocks" => inner.blocks,
        "block_len" => inner.block_len,
        "prot_len" => inner.prot_len,
        "threshold" => inner.threshold,
        other => {
            set_error(format!("unknown field '{other}'"));
            return BczkLabStatus::InvalidArgument;
        }
    };
    *out = value;
    BczkLabStatus::Ok
}

/// Renders the flat key-value record (one `key=value` per line) into the
/// caller's buffer, NUL-terminated.
///
/// # Safety
/// `p` must be valid; `buf` must point to `cap` writable bytes; `written`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn bczk_lab_params_record(
    p: *const BczkLabParams,
    buf: *mut c_char,
    cap: usize,
    written: *mut usize,
) -> BczkLabStatus {
    if p.is_null() || written.is_null() {
        set_error("null pointer argument");
        return BczkLabStatus::InvalidArgument;
    }
    let mut text = String::new();
    for (k, v) in (*p).inner.to_kv() {
        text.push_str(&k);
        text.push('=');
        text.push_str(&v);
        text.push('\n');
    }
    let bytes = text.as_bytes();
    *written = bytes.len() + 1;
    if buf.is_null() || cap < bytes.len() + 1 {
        set_error(format!("need {} bytes", bytes.len() + 1));
        return BczkLabStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, bytes.len());
    *buf.add(bytes.len()) = 0;
    BczkLabStatus::Ok
}

/// Exact-rational verification of the block-coverage, rigging, and
/// combination inequalities at one (q, lambda) point.
///
/// # Safety
/// `holds` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bczk_lab_bound_check(
    q: u64,
    lambda: u64,
    holds: *mut bool,
) -> BczkLabStatus {
    if holds.is_null() {
        set_error("holds pointer is null");
        return BczkLabStatus::InvalidArgument;
    }
    match params::check_claim_bounds(&[(q, lambda)]) {
        Ok(report) => {
            *holds = report.all_hold();
            BczkLabStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_for(&e)
        }
    }
}

/// ln P[Bin(n, p) >= k]; exact big-integer arithmetic at p = 1/2.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bczk_lab_binom_tail_log(
    n: u64,
    p: f64,
    k: u64,
    out: *mut f64,
) -> BczkLabStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return BczkLabStatus::InvalidArgument;
    }
    match soundness::binom_tail_log(n, p, k) {
        Ok(v) => {
            *out = v;
            BczkLabStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_for(&e)
        }
    }
}

/// Closed-form conditioned quantities of the cloning attack after `i`
/// iterations at witness density `eps`.
///
/// # Safety
/// `delta` and `prod_alpha` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bczk_lab_closed_form_delta(
    eps: f64,
    i: u32,
    delta: *mut f64,
    prod_alpha: *mut f64,
) -> BczkLabStatus {
    if delta.is_null() || prod_alpha.is_null() {
        set_error("null pointer argument");
        return BczkLabStatus::InvalidArgument;
    }
    if !(0.0..=1.0).contains(&eps) || eps.is_nan() {
        set_error(format!("eps = {eps} outside [0, 1]"));
        return BczkLabStatus::InvalidArgument;
    }
    let (d, pa) = closed_form_delta(eps, i);
    *delta = d;
    *prod_alpha = pa;
    BczkLabStatus::Ok
}

/// Runs one experiment from a TOML config string, writing `results.jsonl`
/// and `summary.csv` under `out_dir`. Returns `Ok` when every criterion
/// passed and `CriterionFailed` when the run completed with a failing
/// criterion.
///
/// # Safety
/// `config_toml` and `out_dir` must be valid NUL-terminated UTF-8 strings.
#[no_mangle]
pub unsafe extern "C" fn bczk_lab_run_experiment(
    config_toml: *const c_char,
    out_dir: *const c_char,
    workers: u32,
) -> BczkLabStatus {
    if config_toml.is_null() || out_dir.is_null() {
        set_error("null pointer argument");
        return BczkLabStatus::InvalidArgument;
    }
    let (Ok(config_text), Ok(dir)) = (
        CStr::from_ptr(config_toml).to_str(),
        CStr::from_ptr(out_dir).to_str(),
    ) else {
        set_error("arguments are not UTF-8");
        return BczkLabStatus::InvalidArgument;
    };
    let config = match ExperimentConfig::parse(config_text) {
        Ok(c) => c,
        Err(e) => {
            set_error(e.to_string());
            return BczkLabStatus::InvalidArgument;
        }
    };
    match bczk_lab::exp::run_experiment(&config, Path::new(dir), workers.max(1) as usize) {
        Ok(summary) if summary.all_pass() => BczkLabStatus::Ok,
        Ok(summary) => {
            let failing: Vec<String> = summary
                .criteria
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.criterion.clone())
                .collect();
            set_error(format!("criteria failed: {}", failing.join(", ")));
            BczkLabStatus::CriterionFailed
        }
        Err(e) => {
            set_error(e.to_string());
            status_for(&e)
        }
    }
}
