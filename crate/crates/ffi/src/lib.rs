//! C interface to `finsler-metrize`.
//!
//! A scenario is created from TOML text and used through an opaque handle.
//! Every call returns an [`FmStatus`]; on failure the message is available
//! from [`fm_last_error`] on the same thread. Reports come back as
//! NUL-terminated JSON strings owned by the library and released with
//! [`fm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use finsler_metrize::app::{self, Connection};
use finsler_metrize::config::{parse_config, ScenarioConfig};
use finsler_metrize::connection::{autoparallel_rhs, connection_coefficients};
use finsler_metrize::geometry::{Point, TangentVector};
use finsler_metrize::report::Report;
use finsler_metrize::Error;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    SingularMetric = 4,
    Degenerate = 5,
    Inadmissible = 6,
    /// Blow-up, domain exit or an undefined residual.
    Numerical = 7,
    /// A theorem branch could not produce a Lagrangian.
    NoLagrangian = 8,
    Io = 9,
    Panic = 10,
}

impl From<&Error> for FmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) | Error::ZeroCoefficients => FmStatus::Config,
            Error::SingularMetric { .. } => FmStatus::SingularMetric,
            Error::DegenerateHessian { .. } | Error::DegenerateResult(_) | Error::NullOneForm { .. } => {
                FmStatus::Degenerate
            }
            Error::Inadmissible { .. } => FmStatus::Inadmissible,
            Error::BlowUp { .. }
            | Error::LeftDomain { .. }
            | Error::UndefinedResidual(_)
            | Error::InsufficientDirections { .. }
            | Error::NoUsableSamples(_) => FmStatus::Numerical,
            Error::NoSubcase(_) | Error::MissingFreeFunction | Error::FitNotSatisfied(_) => FmStatus::NoLagrangian,
            Error::Io(_) => FmStatus::Io,
        }
    }
}

/// Opaque scenario handle.
pub struct FmScenario {
    config: ScenarioConfig,
    connection: Connection,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: FmStatus, msg: &str) -> FmStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> FmStatus {
    fail(e.into(), &e.to_string())
}

/// Runs `f`, turning panics into `FmStatus::Panic`.
fn guarded<F: FnOnce() -> FmStatus>(f: F) -> FmStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            fail(FmStatus::Panic, &msg)
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, FmStatus> {
    if p.is_null() {
        return Err(fail(FmStatus::NullPointer, &format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(FmStatus::InvalidUtf8, &format!("{what} is not UTF-8")))
}

unsafe fn scenario<'a>(s: *const FmScenario) -> Result<&'a FmScenario, FmStatus> {
    s.as_ref().ok_or_else(|| fail(FmStatus::NullPointer, "scenario is null"))
}

fn build(config: ScenarioConfig) -> Result<FmScenario, Error> {
    let connection = app::build_connection(&config)?;
    Ok(FmScenario { config, connection })
}

/// Parses a scenario from TOML text. On success `*out` owns a new handle
/// that must be released with [`fm_scenario_free`].
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_from_toml(toml: *const c_char, out: *mut *mut FmScenario) -> FmStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FmStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match str_arg(toml, "toml") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_config(text).and_then(build) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(s));
                FmStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `s` must be null or a handle from [`fm_scenario_from_toml`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_free(s: *mut FmScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Overrides the sampling seed.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_set_seed(s: *mut FmScenario, seed: u64) -> FmStatus {
    guarded(|| match s.as_mut() {
        Some(s) => {
            s.config.sampling.seed = seed;
            FmStatus::Ok
        }
        None => fail(FmStatus::NullPointer, "scenario is null"),
    })
}

/// Overrides one decide tolerance by name, e.g. `"fit_residual"`.
///
/// # Safety
/// `s` must be a live handle and `key` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_set_tolerance(s: *mut FmScenario, key: *const c_char, value: f64) -> FmStatus {
    guarded(|| {
        let Some(s) = s.as_mut() else {
            return fail(FmStatus::NullPointer, "scenario is null");
        };
        let key = match str_arg(key, "key") {
            Ok(k) => k,
            Err(st) => return st,
        };
        match s.config.tolerances.set(key, value) {
            Ok(()) => FmStatus::Ok,
            Err(e) => from_error(&e),
        }
    })
}

unsafe fn emit(
    s: *const FmScenario,
    json_out: *mut *mut c_char,
    exit_code: *mut i32,
    run: fn(&ScenarioConfig) -> Result<Report, Error>,
) -> FmStatus {
    guarded(|| {
        if json_out.is_null() {
            return fail(FmStatus::NullPointer, "json_out is null");
        }
        *json_out = ptr::null_mut();
        let s = match scenario(s) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match run(&s.config) {
            Ok(r) => {
                if let Some(c) = exit_code.as_mut() {
                    *c = r.outcome.exit_code();
                }
                *json_out = CString::new(r.to_json()).expect("JSON has no NUL").into_raw();
                FmStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Subfamily classification report.
///
/// # Safety
/// `s` must be a live handle; `json_out` a valid pointer; `exit_code` null
/// or valid.
#[no_mangle]
pub unsafe extern "C" fn fm_classify(
    s: *const FmScenario,
    json_out: *mut *mut c_char,
    exit_code: *mut i32,
) -> FmStatus {
    emit(s, json_out, exit_code, app::run_classify)
}

/// Metrizability report. `*exit_code` is 0 when a Lagrangian was emitted,
/// 2 otherwise.
///
/// # Safety
/// As for [`fm_classify`].
#[no_mangle]
pub unsafe extern "C" fn fm_decide(s: *const FmScenario, json_out: *mut *mut c_char, exit_code: *mut i32) -> FmStatus {
    emit(s, json_out, exit_code, app::run_decide)
}

/// Verification report. `*exit_code` is 0 when every check passed.
///
/// # Safety
/// As for [`fm_classify`].
#[no_mangle]
pub unsafe extern "C" fn fm_verify(s: *const FmScenario, json_out: *mut *mut c_char, exit_code: *mut i32) -> FmStatus {
    emit(s, json_out, exit_code, app::run_verify)
}

/// Γ^μ_{νρ}(x) written to `out[16 μ + 4 ν + ρ]`.
///
/// # Safety
/// `x` must point to 4 doubles and `out` to 64.
#[no_mangle]
pub unsafe extern "C" fn fm_connection_coefficients(s: *const FmScenario, x: *const f64, out: *mut f64) -> FmStatus {
    guarded(|| {
        let s = match scenario(s) {
            Ok(s) => s,
            Err(st) => return st,
        };
        if x.is_null() || out.is_null() {
            return fail(FmStatus::NullPointer, "x or out is null");
        }
        let p = Point::new(*(x as *const [f64; 4]));
        match connection_coefficients(&s.connection, &p) {
            Ok(g) => {
                let dst = std::slice::from_raw_parts_mut(out, 64);
                for (d, v) in dst.iter_mut().zip(g.iter().flatten().flatten()) {
                    *d = *v;
                }
                FmStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// −Γ^μ_{νρ}(x) v^ν v^ρ written to `out[4]`.
///
/// # Safety
/// `x`, `v` and `out` must each point to 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn fm_autoparallel_rhs(
    s: *const FmScenario,
    x: *const f64,
    v: *const f64,
    out: *mut f64,
) -> FmStatus {
    guarded(|| {
        let s = match scenario(s) {
            Ok(s) => s,
            Err(st) => return st,
        };
        if x.is_null() || v.is_null() || out.is_null() {
            return fail(FmStatus::NullPointer, "x, v or out is null");
        }
        let p = Point::new(*(x as *const [f64; 4]));
        let t = TangentVector::new(*(v as *const [f64; 4]));
        match autoparallel_rhs(&s.connection, &p, &t) {
            Ok(a) => {
                std::slice::from_raw_parts_mut(out, 4).copy_from_slice(&a.components);
                FmStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `p` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn fm_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

/// Message for the last failed call on this thread; empty after a
/// successful one. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
