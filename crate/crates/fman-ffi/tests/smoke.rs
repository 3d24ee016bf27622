//! Exercises the C ABI through the extern "C" surface itself.

use std::ffi::{CStr, CString};
use std::ptr;

use fman_ffi::*;

fn load(spec: &str) -> *mut FmanManifold {
    let spec = CString::new(spec).unwrap();
    let mut man: *mut FmanManifold = ptr::null_mut();
    let status = unsafe { fman_manifold_load(spec.as_ptr(), &mut man) };
    assert_eq!(status, FmanStatus::Ok);
    assert!(!man.is_null());
    man
}

#[test]
fn verify_gallery_manifold_through_ffi() {
    let man = load("gallery:standard_S(1,1)");
    unsafe {
        assert_eq!(fman_manifold_dim(man), 3);
        assert_eq!(fman_manifold_s(man), 1);
        let mut report: *mut FmanReport = ptr::null_mut();
        let status = fman_verify(man, 16, 0, 1e-8, &mut report);
        assert_eq!(status, FmanStatus::Ok);
        assert_eq!(fman_report_passed(report), 1);
        let json = fman_report_json(report);
        assert!(!json.is_null());
        let text = CStr::from_ptr(json).to_str().unwrap();
        assert!(text.contains("\"labels\""));
        assert!(text.contains("trans-S"));
        fman_string_free(json);
        fman_report_free(report);
        fman_manifold_free(man);
    }
}

#[test]
fn extraction_through_ffi() {
    let man = load("gallery:kenmotsu(1)");
    unsafe {
        let dim = fman_manifold_dim(man) as usize;
        let s = fman_manifold_s(man) as usize;
        assert_eq!((dim, s), (3, 1));
        let point = [0.25, 0.1, -0.3];
        let mut alpha = vec![0.0; s];
        let mut beta = vec![0.0; s];
        let mut residual = f64::NAN;
        let status = fman_extract_at(
            man,
            point.as_ptr(),
            alpha.as_mut_ptr(),
            beta.as_mut_ptr(),
            &mut residual,
        );
        assert_eq!(status, FmanStatus::Ok);
        assert!(alpha[0].abs() < 1e-9, "alpha {}", alpha[0]);
        assert!((beta[0] - 1.0).abs() < 1e-9, "beta {}", beta[0]);
        assert!(residual < 1e-9);
        fman_manifold_free(man);
    }
}

#[test]
fn failing_manifold_reports_check_failure() {
    let text = CString::new(
        r#"
n = 1
s = 1
coords = ["x", "y", "z"]
domain = [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]]
g = [["1", "0", "0"], ["0", "2", "0"], ["0", "0", "1"]]
f = [["0", "1", "0"], ["-1", "0", "0"], ["0", "0", "0"]]
xi = [["0", "0", "1"]]
eta = [["0", "0", "1"]]
"#,
    )
    .unwrap();
    unsafe {
        let mut man: *mut FmanManifold = ptr::null_mut();
        assert_eq!(
            fman_manifold_from_toml(text.as_ptr(), &mut man),
            FmanStatus::Ok
        );
        let mut report: *mut FmanReport = ptr::null_mut();
        let status = fman_verify(man, 16, 0, 1e-8, &mut report);
        assert_eq!(status, FmanStatus::CheckFailed);
        assert_eq!(fman_report_passed(report), 0);
        fman_report_free(report);
        fman_manifold_free(man);
    }
}

#[test]
fn errors_and_null_handling() {
    unsafe {
        let mut man: *mut FmanManifold = ptr::null_mut();
        let bad = CString::new("gallery:not_a_thing").unwrap();
        assert_eq!(
            fman_manifold_load(bad.as_ptr(), &mut man),
            FmanStatus::InputError
        );
        let msg = CStr::from_ptr(fman_last_error()).to_str().unwrap();
        assert!(msg.contains("not_a_thing"), "{msg}");

        assert_eq!(
            fman_manifold_load(ptr::null(), &mut man),
            FmanStatus::NullArgument
        );
        assert_eq!(fman_manifold_dim(ptr::null()), 0);
        assert_eq!(fman_report_passed(ptr::null()), 0);
        assert!(fman_report_json(ptr::null()).is_null());
        fman_manifold_free(ptr::null_mut());
        fman_report_free(ptr::null_mut());
        fman_string_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_is_current() {
    let header = include_str!("../include/fman.h");
    for symbol in [
        "FmanStatus",
        "fman_manifold_load",
        "fman_verify",
        "fman_extract_at",
        "fman_report_json",
        "fman_last_error",
        "FMAN_STATUS_CHECK_FAILED",
    ] {
        assert!(header.contains(symbol), "header lacks {symbol}");
    }
}
