//! C ABI for the metric f-manifold verification engine.
//!
//! All functions are panic-safe and communicate failures through
//! [`FmanStatus`]; the last error message is kept per thread and can be read
//! with `fman_last_error`. Handles are opaque and must be released with the
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use fman::deffile::{LoadedDefinition, ManifoldDefinitionFile};
use fman::report::ReportDocument;
use fman::trans_s;
use fman::verify::{CheckConfig, Verifier};
use fman::MetricFManifold;

/// Status codes mirroring the CLI exit contract, plus FFI-specific cases.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FmanStatus {
    Ok = 0,
    CheckFailed = 1,
    InputError = 2,
    NullArgument = 3,
    Panic = 4,
}

/// Opaque manifold handle.
pub struct FmanManifold {
    inner: MetricFManifold,
}

/// Opaque report handle.
pub struct FmanReport {
    inner: ReportDocument,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fman_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guarded(f: impl FnOnce() -> FmanStatus) -> FmanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            FmanStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

fn load(spec: &str) -> Result<MetricFManifold, String> {
    let loaded = if let Some(name) = spec.strip_prefix("gallery:") {
        LoadedDefinition::Manifold(
            fman::constructions::gallery::manifold(name).map_err(|e| e.to_string())?,
        )
    } else {
        ManifoldDefinitionFile::load(Path::new(spec))
            .and_then(|def| def.build())
            .map_err(|e| e.to_string())?
    };
    match loaded {
        LoadedDefinition::Manifold(man) => Ok(man),
        LoadedDefinition::Fiber(_) => {
            Err("spec denotes an almost Hermitian fiber, not a metric f-manifold".into())
        }
    }
}

/// Loads a manifold from a definition file path or a `gallery:NAME` URI.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fman_manifold_load(
    spec: *const c_char,
    out: *mut *mut FmanManifold,
) -> FmanStatus {
    guarded(|| {
        let (Some(spec), false) = (read_str(spec), out.is_null()) else {
            set_error("null argument");
            return FmanStatus::NullArgument;
        };
        match load(spec) {
            Ok(man) => {
                *out = Box::into_raw(Box::new(FmanManifold { inner: man }));
                FmanStatus::Ok
            }
            Err(msg) => {
                set_error(&msg);
                FmanStatus::InputError
            }
        }
    })
}

/// Parses a manifold from definition-file text (TOML).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fman_manifold_from_toml(
    text: *const c_char,
    out: *mut *mut FmanManifold,
) -> FmanStatus {
    guarded(|| {
        let (Some(text), false) = (read_str(text), out.is_null()) else {
            set_error("null argument");
            return FmanStatus::NullArgument;
        };
        let built = ManifoldDefinitionFile::from_toml(text).and_then(|def| def.build());
        match built {
            Ok(LoadedDefinition::Manifold(man)) => {
                *out = Box::into_raw(Box::new(FmanManifold { inner: man }));
                FmanStatus::Ok
            }
            Ok(LoadedDefinition::Fiber(_)) => {
                set_error("definition denotes a fiber (s = 0), not a metric f-manifold");
                FmanStatus::InputError
            }
            Err(err) => {
                set_error(&err.to_string());
                FmanStatus::InputError
            }
        }
    })
}

/// # Safety
/// `man` must come from a successful load and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fman_manifold_free(man: *mut FmanManifold) {
    if !man.is_null() {
        drop(Box::from_raw(man));
    }
}

/// Chart dimension 2n+s; 0 if `man` is null.
///
/// # Safety
/// `man` must be null or a live manifold handle.
#[no_mangle]
pub unsafe extern "C" fn fman_manifold_dim(man: *const FmanManifold) -> u32 {
    man.as_ref().map_or(0, |m| m.inner.dim() as u32)
}

/// Number of structure vector fields s; 0 if `man` is null.
///
/// # Safety
/// `man` must be null or a live manifold handle.
#[no_mangle]
pub unsafe extern "C" fn fman_manifold_s(man: *const FmanManifold) -> u32 {
    man.as_ref().map_or(0, |m| m.inner.s() as u32)
}

fn config(points: u32, seed: u64, tol: f64) -> CheckConfig {
    CheckConfig {
        points: points as usize,
        seed,
        tol_structural: tol,
        ..CheckConfig::default()
    }
}

/// Runs the full verification (axioms plus every applicable identity).
/// Returns `Ok` when every check passes, `CheckFailed` when the report
/// contains failures (the report is produced either way).
///
/// # Safety
/// `man` must be a live manifold handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fman_verify(
    man: *const FmanManifold,
    points: u32,
    seed: u64,
    tol: f64,
    out: *mut *mut FmanReport,
) -> FmanStatus {
    guarded(|| {
        let (Some(man), false) = (man.as_ref(), out.is_null()) else {
            set_error("null argument");
            return FmanStatus::NullArgument;
        };
        let cfg = config(points, seed, tol);
        let run = Verifier::new(&man.inner, cfg.clone()).and_then(|v| {
            let report = v.verify_report()?;
            Ok((report, v.classify(), v.extraction_summary()))
        });
        match run {
            Ok((report, classification, extracted)) => {
                let doc = ReportDocument {
                    tool_version: env!("CARGO_PKG_VERSION").to_string(),
                    command: "verify".into(),
                    input: "(ffi)".into(),
                    seed,
                    point_count: cfg.points,
                    tolerances: Vec::new(),
                    checks: report.checks,
                    labels: classification.label_strings(),
                    extracted,
                    notes: report.notes,
                };
                let passed = doc.passed();
                *out = Box::into_raw(Box::new(FmanReport { inner: doc }));
                if passed {
                    FmanStatus::Ok
                } else {
                    set_error("one or more checks failed");
                    FmanStatus::CheckFailed
                }
            }
            Err(err) => {
                set_error(&err.to_string());
                FmanStatus::InputError
            }
        }
    })
}

/// Extracts the characteristic functions at one point by the pointwise
/// least-squares route. `point` must hold `fman_manifold_dim` values;
/// `alpha_out` and `beta_out` must hold `fman_manifold_s` values each.
/// `residual_out` may be null.
///
/// # Safety
/// All pointers must be valid for the documented lengths.
#[no_mangle]
pub unsafe extern "C" fn fman_extract_at(
    man: *const FmanManifold,
    point: *const f64,
    alpha_out: *mut f64,
    beta_out: *mut f64,
    residual_out: *mut f64,
) -> FmanStatus {
    guarded(|| {
        let Some(man) = man.as_ref() else {
            set_error("null argument");
            return FmanStatus::NullArgument;
        };
        if point.is_null() || alpha_out.is_null() || beta_out.is_null() {
            set_error("null argument");
            return FmanStatus::NullArgument;
        }
        let dim = man.inner.dim();
        let s = man.inner.s();
        let p = std::slice::from_raw_parts(point, dim);
        let run = man
            .inner
            .point_ctx(p)
            .and_then(|ctx| trans_s::extract_pointwise(&man.inner, &ctx));
        match run {
            Ok(ex) => {
                for i in 0..s {
                    *alpha_out.add(i) = ex.cf.alpha[i];
                    *beta_out.add(i) = ex.cf.beta[i];
                }
                if !residual_out.is_null() {
                    *residual_out = ex.normalized_residual;
                }
                FmanStatus::Ok
            }
            Err(err) => {
                set_error(&err.to_string());
                FmanStatus::InputError
            }
        }
    })
}

/// 1 when every check in the report passed, else 0.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn fman_report_passed(report: *const FmanReport) -> i32 {
    report.as_ref().map_or(0, |r| i32::from(r.inner.passed()))
}

/// The machine-readable report as a JSON string; free with
/// `fman_string_free`.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn fman_report_json(report: *const FmanReport) -> *mut c_char {
    let Some(report) = report.as_ref() else {
        return std::ptr::null_mut();
    };
    let json = report.inner.to_json().replace('\0', " ");
    CString::new(json).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `report` must come from `fman_verify` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fman_report_free(report: *mut FmanReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from `fman_report_json` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fman_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
