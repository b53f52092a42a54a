//! ABI conformance: every exported entry point is exercised through the
//! C calling convention, error channels included, and the committed
//! header is checked against the export list.

use std::ffi::{c_char, c_void, CStr};

use qcurv::spectral::{beckner_constant, critical_exponent, psigma_eigenvalue};
use qcurv_ffi::*;

fn last_error() -> String {
    let needed = unsafe { qcurv_last_error_message(std::ptr::null_mut(), 0) };
    let mut buf = vec![0i8 as c_char; needed];
    unsafe { qcurv_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take_while(|&&c| c != 0).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn version_and_status_names_are_static_c_strings() {
    let v = unsafe { CStr::from_ptr(qcurv_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    for (status, name) in [
        (QcurvStatus::Ok, "ok"),
        (QcurvStatus::InvalidArgument, "invalid argument"),
        (QcurvStatus::NullPointer, "null pointer"),
        (QcurvStatus::Panic, "panic"),
    ] {
        let s = unsafe { CStr::from_ptr(qcurv_status_name(status)) };
        assert_eq!(s.to_str().unwrap(), name);
    }
}

#[test]
fn scalar_entry_points_match_the_library() {
    let mut out = 0.0;
    for (n, sigma, k) in [(3usize, 0.25, 0usize), (3, 0.25, 5), (4, 0.9, 3)] {
        assert_eq!(
            unsafe { qcurv_eigenvalue(n, sigma, k, &mut out) },
            QcurvStatus::Ok
        );
        assert_eq!(out, psigma_eigenvalue(n, sigma, k).unwrap());
    }
    assert_eq!(
        unsafe { qcurv_sharp_constant(3, 0.25, &mut out) },
        QcurvStatus::Ok
    );
    assert_eq!(out, beckner_constant(3, 0.25).unwrap());
    assert_eq!(
        unsafe { qcurv_critical_exponent(3, 0.25, &mut out) },
        QcurvStatus::Ok
    );
    assert_eq!(out, critical_exponent(3, 0.25).unwrap());
    assert!((out - 2.4).abs() < 1e-15);
}

#[test]
fn errors_flow_through_the_status_channel() {
    let mut out = 0.0;
    // sigma outside (0, n/2).
    let status = unsafe { qcurv_eigenvalue(3, 2.0, 0, &mut out) };
    assert_eq!(status, QcurvStatus::InvalidArgument);
    let msg = last_error();
    assert!(msg.contains("sigma"), "unexpected message: {msg}");

    // Truncated copy stays NUL-terminated and reports the full length.
    let mut small = [1i8 as c_char; 8];
    let needed = unsafe { qcurv_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(needed > small.len());
    assert_eq!(small[7], 0);

    // Null out-pointers are diagnosed, not dereferenced.
    assert_eq!(
        unsafe { qcurv_eigenvalue(3, 0.25, 0, std::ptr::null_mut()) },
        QcurvStatus::NullPointer
    );
    assert_eq!(
        unsafe { qcurv_transform_grid_len(std::ptr::null(), &mut 0usize) },
        QcurvStatus::NullPointer
    );
    assert!(last_error().contains("null"));

    // Frees tolerate null.
    unsafe {
        qcurv_transform_free(std::ptr::null_mut());
        qcurv_string_free(std::ptr::null_mut());
    }
}

#[test]
fn transform_bubble_functional_pipeline() {
    let (n, sigma) = (3usize, 0.25);
    let mut handle: *mut QcurvTransform = std::ptr::null_mut();
    assert_eq!(
        unsafe { qcurv_transform_new(n, 32, 1, &mut handle) },
        QcurvStatus::Ok
    );
    let mut glen = 0usize;
    let mut dim = 0usize;
    unsafe {
        assert_eq!(qcurv_transform_grid_len(handle, &mut glen), QcurvStatus::Ok);
        assert_eq!(qcurv_transform_dimension(handle, &mut dim), QcurvStatus::Ok);
    }
    assert_eq!(dim, n);
    assert!(glen > 0);

    // Grid coordinates come back as unit vectors.
    let mut coords = vec![0.0f64; glen * (n + 1)];
    assert_eq!(
        unsafe { qcurv_transform_grid_coords(handle, coords.as_mut_ptr(), coords.len()) },
        QcurvStatus::Ok
    );
    for p in coords.chunks_exact(n + 1) {
        let norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    // Wrong buffer length is a mismatch with a sized message.
    assert_eq!(
        unsafe { qcurv_transform_grid_coords(handle, coords.as_mut_ptr(), glen) },
        QcurvStatus::Mismatch
    );
    assert!(last_error().contains(&format!("{}", glen * (n + 1))));

    // A bubble's functional level under K == 1 is the sharp constant.
    let center = [0.0, 0.0, 0.0, 1.0];
    let mut samples = vec![0.0f64; glen];
    assert_eq!(
        unsafe {
            qcurv_bubble_samples(
                handle,
                sigma,
                center.as_ptr(),
                center.len(),
                2.0,
                samples.as_mut_ptr(),
                samples.len(),
            )
        },
        QcurvStatus::Ok
    );
    assert!(samples.iter().all(|s| s.is_finite()));
    let k = vec![1.0f64; glen];
    let mut level = 0.0;
    assert_eq!(
        unsafe {
            qcurv_functional_level(
                handle,
                sigma,
                samples.as_ptr(),
                k.as_ptr(),
                glen,
                &mut level,
            )
        },
        QcurvStatus::Ok
    );
    let s = beckner_constant(n, sigma).unwrap();
    assert!(
        (level - s).abs() < 1e-4 * s,
        "bubble level {level} vs sharp constant {s}"
    );

    // A non-unit center is renormalized to the same point.
    let scaled = [0.0, 0.0, 0.0, 2.5];
    let mut again = vec![0.0f64; glen];
    assert_eq!(
        unsafe {
            qcurv_bubble_samples(
                handle,
                sigma,
                scaled.as_ptr(),
                scaled.len(),
                2.0,
                again.as_mut_ptr(),
                again.len(),
            )
        },
        QcurvStatus::Ok
    );
    assert_eq!(samples, again);

    unsafe { qcurv_transform_free(handle) };
}

#[test]
fn flow_from_the_constant_start_converges_under_constant_curvature() {
    let (n, sigma) = (3usize, 0.25);
    let mut handle: *mut QcurvTransform = std::ptr::null_mut();
    assert_eq!(
        unsafe { qcurv_transform_new(n, 16, 1, &mut handle) },
        QcurvStatus::Ok
    );
    let mut glen = 0usize;
    unsafe { qcurv_transform_grid_len(handle, &mut glen) };
    let k = vec![1.0f64; glen];
    let mut outcome = QcurvFlowOutcome {
        flow_status: -1,
        steps: 0,
        final_level: 0.0,
        final_gradient_norm: f64::NAN,
    };
    assert_eq!(
        unsafe { qcurv_flow(handle, sigma, k.as_ptr(), glen, 500, &mut outcome) },
        QcurvStatus::Ok
    );
    assert_eq!(outcome.flow_status, 0, "outcome: {outcome:?}");
    let s = beckner_constant(n, sigma).unwrap();
    assert!((outcome.final_level - s).abs() < 1e-8 * s);
    assert!(outcome.final_gradient_norm < 1e-8);

    // max_steps == 0 is rejected up front.
    assert_eq!(
        unsafe { qcurv_flow(handle, sigma, k.as_ptr(), glen, 0, &mut outcome) },
        QcurvStatus::InvalidArgument
    );
    unsafe { qcurv_transform_free(handle) };
}

extern "C" fn tilted(coords: *const f64, len: usize, _ctx: *mut c_void) -> f64 {
    let x = unsafe { std::slice::from_raw_parts(coords, len) };
    2.0 + x[3]
}

extern "C" fn two_peak(coords: *const f64, len: usize, _ctx: *mut c_void) -> f64 {
    let x = unsafe { std::slice::from_raw_parts(coords, len) };
    1.0 + 0.005 * (x[3] * x[3] - 0.25)
}

fn existence(
    k: QcurvCurvatureFn,
    flag_degenerate: i32,
) -> Result<serde_json::Value, (QcurvStatus, String)> {
    let mut out: *mut c_char = std::ptr::null_mut();
    let status = unsafe { qcurv_existence_json(3, 0.25, k, std::ptr::null_mut(), 60, 0, flag_degenerate, &mut out) };
    if status != QcurvStatus::Ok {
        return Err((status, last_error()));
    }
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { qcurv_string_free(out) };
    Ok(serde_json::from_str(&text).unwrap())
}

#[test]
fn existence_reports_round_trip_as_json() {
    // Tilted curvature: one admissible point, pinching hopeless.
    let report = existence(Some(tilted), 0).unwrap();
    assert_eq!(report["solution_expected"], false);
    assert_eq!(report["k_plus_size"], 1);
    assert_eq!(report["a1"], 1);

    // The two-peak family has a degenerate equatorial ridge: the
    // conservative default refuses, the flagging mode classifies around
    // it and both verdicts hold.
    let err = existence(Some(two_peak), 0).unwrap_err();
    assert_eq!(err.0, QcurvStatus::Degenerate);
    assert!(err.1.contains("degenerate"), "message: {}", err.1);
    let report = existence(Some(two_peak), 1).unwrap();
    assert_eq!(report["solution_expected"], true, "report: {report}");
    assert_eq!(report["a1"], 2);
    assert_eq!(report["verdict_two_point"]["holds"], true);
    assert_eq!(report["verdict_counting"]["holds"], true);

    // A null callback is a null-pointer error.
    let err = existence(None, 0).unwrap_err();
    assert_eq!(err.0, QcurvStatus::NullPointer);
}

#[test]
fn header_lists_every_symbol() {
    let header = include_str!("../include/qcurv.h");
    for symbol in [
        "qcurv_version",
        "qcurv_status_name",
        "qcurv_last_error_message",
        "qcurv_eigenvalue",
        "qcurv_sharp_constant",
        "qcurv_critical_exponent",
        "qcurv_transform_new",
        "qcurv_transform_free",
        "qcurv_transform_grid_len",
        "qcurv_transform_dimension",
        "qcurv_transform_grid_coords",
        "qcurv_bubble_samples",
        "qcurv_functional_level",
        "qcurv_flow",
        "qcurv_existence_json",
        "qcurv_string_free",
        "QcurvStatus",
        "QcurvTransform",
        "QcurvFlowOutcome",
        "QcurvCurvatureFn",
        "QCURV_STATUS_OK",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
