//! C ABI for the qcurv numerical laboratory.
//!
//! Conventions, in order of importance:
//!
//! * Every fallible entry point returns [`QcurvStatus`]; `QCURV_STATUS_OK`
//!   is zero.  On failure a thread-local message is recorded and can be
//!   copied out with [`qcurv_last_error_message`].  Out-parameters are
//!   written only on success.
//! * Handles are opaque.  Create a [`QcurvTransform`] with
//!   [`qcurv_transform_new`], release it with [`qcurv_transform_free`];
//!   passing null to any entry point yields `QCURV_STATUS_NULL_POINTER`
//!   rather than undefined behavior.
//! * Sample buffers are caller-allocated and their lengths are validated
//!   against the exact grid size before anything is written.
//! * Strings returned through out-parameters are heap-allocated and must
//!   be released with [`qcurv_string_free`].
//! * Every entry point catches panics and maps them to
//!   `QCURV_STATUS_PANIC`; no unwinding crosses the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qcurv::bubbles::{bubble_spectral, functional_jk, BubbleParams};
use qcurv::error::Error;
use qcurv::flow::{constant_start, flow_run, FlowOptions, FlowStatus};
use qcurv::kfunc::KFunction;
use qcurv::morse::{
    existence_verdict, find_critical_points, DegeneratePolicy, FindOptions,
};
use qcurv::spectral::{
    beckner_constant, critical_exponent, psigma_eigenvalue, Transform,
};
use qcurv::sphere::{GridMode, SpherePoint};

/// Stable result codes; zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcurvStatus {
    Ok = 0,
    /// A parameter lies outside the admissible range of the operator family.
    InvalidArgument = 1,
    /// The grid/basis combination is not implemented.
    Unsupported = 2,
    /// Buffer lengths or discretizations do not agree.
    Mismatch = 3,
    /// An iterative routine failed to reach its tolerance.
    NoConvergence = 4,
    /// A quantity required to be bounded away from zero degenerated.
    Degenerate = 5,
    /// Configuration text could not be validated.
    Config = 6,
    Io = 7,
    Serialization = 8,
    /// A required pointer argument was null.
    NullPointer = 9,
    /// An internal panic was caught at the boundary.
    Panic = 10,
}

/// Opaque spectral transform handle (dimension, truncation, grid).
pub struct QcurvTransform {
    tf: Transform,
}

/// Outcome summary of a curvature flow run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QcurvFlowOutcome {
    /// 0 = converged, 1 = concentrated along a bubble, 2 = step cap hit.
    pub flow_status: c_int,
    /// Descent steps taken.
    pub steps: usize,
    /// Last value of the normalized curvature functional.
    pub final_level: f64,
    /// Last constrained-gradient norm.
    pub final_gradient_norm: f64,
}

/// Pointwise curvature callback: receives the ambient coordinates of a
/// point on the sphere (`len == n + 1`) plus the caller's context pointer,
/// and returns `K` at that point.  Derivatives are taken by geodesic
/// central differences, so the callback must be smooth.
pub type QcurvCurvatureFn =
    Option<extern "C" fn(coords: *const f64, len: usize, ctx: *mut c_void) -> f64>;

struct CallbackK {
    f: extern "C" fn(*const f64, usize, *mut c_void) -> f64,
    ctx: *mut c_void,
}

impl KFunction for CallbackK {
    fn value(&self, p: &SpherePoint) -> f64 {
        let c = p.coords();
        (self.f)(c.as_ptr(), c.len(), self.ctx)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<Vec<u8>>) {
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: Error) -> QcurvStatus {
    let status = match &e {
        Error::InvalidParameter(_) => QcurvStatus::InvalidArgument,
        Error::Unsupported(_) => QcurvStatus::Unsupported,
        Error::Mismatch(_) => QcurvStatus::Mismatch,
        Error::NoConvergence(_) => QcurvStatus::NoConvergence,
        Error::Degenerate(_) => QcurvStatus::Degenerate,
        Error::Config(_) => QcurvStatus::Config,
        Error::Io(_) => QcurvStatus::Io,
        Error::Serde(_) => QcurvStatus::Serialization,
    };
    set_last_error(e.to_string());
    status
}

fn null_arg(name: &str) -> QcurvStatus {
    set_last_error(format!("{name} must not be null"));
    QcurvStatus::NullPointer
}

fn guard(f: impl FnOnce() -> QcurvStatus) -> QcurvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic caught at the C boundary");
            QcurvStatus::Panic
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qcurv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static name for a status code (never null).
#[no_mangle]
pub extern "C" fn qcurv_status_name(status: QcurvStatus) -> *const c_char {
    let name: &'static str = match status {
        QcurvStatus::Ok => "ok\0",
        QcurvStatus::InvalidArgument => "invalid argument\0",
        QcurvStatus::Unsupported => "unsupported\0",
        QcurvStatus::Mismatch => "mismatch\0",
        QcurvStatus::NoConvergence => "no convergence\0",
        QcurvStatus::Degenerate => "degenerate\0",
        QcurvStatus::Config => "config\0",
        QcurvStatus::Io => "io\0",
        QcurvStatus::Serialization => "serialization\0",
        QcurvStatus::NullPointer => "null pointer\0",
        QcurvStatus::Panic => "panic\0",
    };
    name.as_ptr() as *const c_char
}

/// Copy the calling thread's last error message (including the trailing
/// NUL) into `buf`, truncating to `cap` bytes while keeping the result
/// NUL-terminated.  Returns the full size in bytes including the NUL, so
/// a return value larger than `cap` signals truncation.  `buf` may be
/// null to query the size.
#[no_mangle]
pub unsafe extern "C" fn qcurv_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let k = bytes.len().min(cap);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, k);
            *buf.add(k - 1) = 0;
        }
        bytes.len()
    })
}

/// Eigenvalue of the conformally covariant operator on degree-`degree`
/// spherical harmonics.
#[no_mangle]
pub unsafe extern "C" fn qcurv_eigenvalue(
    n: usize,
    sigma: f64,
    degree: usize,
    out: *mut f64,
) -> QcurvStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match psigma_eigenvalue(n, sigma, degree) {
            Ok(v) => {
                *out = v;
                QcurvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Sharp constant of the associated Sobolev inequality (the infimum of
/// the normalized functional at `K == 1`).
#[no_mangle]
pub unsafe extern "C" fn qcurv_sharp_constant(
    n: usize,
    sigma: f64,
    out: *mut f64,
) -> QcurvStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match beckner_constant(n, sigma) {
            Ok(v) => {
                *out = v;
                QcurvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Critical Sobolev exponent `2n / (n - 2 sigma)`.
#[no_mangle]
pub unsafe extern "C" fn qcurv_critical_exponent(
    n: usize,
    sigma: f64,
    out: *mut f64,
) -> QcurvStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match critical_exponent(n, sigma) {
            Ok(v) => {
                *out = v;
                QcurvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Create a spectral transform on the n-sphere with truncation `lmax`.
/// `zonal != 0` selects the axially symmetric grid (any `n >= 2`);
/// `zonal == 0` selects the full grid (`n` = 2 or 3 only).
#[no_mangle]
pub unsafe extern "C" fn qcurv_transform_new(
    n: usize,
    lmax: usize,
    zonal: c_int,
    out: *mut *mut QcurvTransform,
) -> QcurvStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let mode = if zonal != 0 {
            GridMode::Zonal
        } else {
            GridMode::Full
        };
        match Transform::new(n, lmax, mode) {
            Ok(tf) => {
                *out = Box::into_raw(Box::new(QcurvTransform { tf }));
                QcurvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a transform handle.  Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn qcurv_transform_free(t: *mut QcurvTransform) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of grid points (the sample-buffer length for this handle).
#[no_mangle]
pub unsafe extern "C" fn qcurv_transform_grid_len(
    t: *const QcurvTransform,
    out: *mut usize,
) -> QcurvStatus {
    guard(|| {
        let Some(h) = t.as_ref() else {
            return null_arg("transform");
        };
        if out.is_null() {
            return null_arg("out");
        }
        *out = h.tf.grid().len();
        QcurvStatus::Ok
    })
}

/// Sphere dimension `n` of the handle.
#[no_mangle]
pub unsafe extern "C" fn qcurv_transform_dimension(
    t: *const QcurvTransform,
    out: *mut usize,
) -> QcurvStatus {
    guard(|| {
        let Some(h) = t.as_ref() else {
            return null_arg("transform");
        };
        if out.is_null() {
            return null_arg("out");
        }
        *out = h.tf.n();
        QcurvStatus::Ok
    })
}

/// Write the ambient coordinates of every grid point, row-major, into
/// `buf`; `len` must equal `grid_len * (n + 1)`.
#[no_mangle]
pub unsafe extern "C" fn qcurv_transform_grid_coords(
    t: *const QcurvTransform,
    buf: *mut f64,
    len: usize,
) -> QcurvStatus {
    guard(|| {
        let Some(h) = t.as_ref() else {
            return null_arg("transform");
        };
        if buf.is_null() {
            return null_arg("buf");
        }
        let expected = h.tf.grid().len() * (h.tf.n() + 1);
        if len != expected {
            set_last_error(format!(
                "coordinate buffer holds {len} values; this grid needs {expected}"
            ));
            return QcurvStatus::Mismatch;
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        for (chunk, p) in out
            .chunks_exact_mut(h.tf.n() + 1)
            .zip(&h.tf.grid().points)
        {
            chunk.copy_from_slice(p.coords());
        }
        QcurvStatus::Ok
    })
}

/// Sample the standard bubble with the given center (ambient vector,
/// renormalized; `center_len` must equal `n + 1`) and concentration
/// `lambda` on the handle's grid.  `len` must equal the grid length.
#[no_mangle]
pub unsafe extern "C" fn qcurv_bubble_samples(
    t: *const QcurvTransform,
    sigma: f64,
    center: *const f64,
    center_len: usize,
    lambda: f64,
    buf: *mut f64,
    len: usize,
) -> QcurvStatus {
    guard(|| {
        let Some(h) = t.as_ref() else {
            return null_arg("transform");
        };
        if center.is_null() {
            return null_arg("center");
        }
        if buf.is_null() {
            return null_arg("buf");
        }
        let n = h.tf.n();
        if center_len != n + 1 {
            set_last_error(format!(
                "center has {center_len} components; ambient vectors on S^{n} have {}",
                n + 1
            ));
            return QcurvStatus::Mismatch;
        }
        if len != h.tf.grid().len() {
            set_last_error(format!(
                "sample buffer holds {len} values; this grid needs {}",
                h.tf.grid().len()
            ));
            return QcurvStatus::Mismatch;
        }
        let c = std::slice::from_raw_parts(center, center_len);
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 1e-12) {
            set_last_error("center must be a nonzero finite vector");
            return QcurvStatus::InvalidArgument;
        }
        let point = match SpherePoint::new(c.iter().map(|x| x / norm).collect()) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let bubble = BubbleParams::standard(point, lambda);
        let samples = (|| {
            let u = bubble_spectral(&h.tf, sigma, &[bubble])?;
            h.tf.inverse(&u)
        })();
        match samples {
            Ok(s) => {
                std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&s);
                QcurvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Normalized curvature functional of the field with samples `u` under
/// the curvature with samples `k`; both buffers must have grid length.
#[no_mangle]
pub unsafe extern "C" fn qcurv_functional_level(
    t: *const QcurvTransform,
    sigma: f64,
    u: *const f64,
    k: *const f64,
    len: usize,
    out: *mut f64,
) -> QcurvStatus {
    guard(|| {
        let Some(h) = t.as_ref() else {
            return null_arg("transform");
        };
        if u.is_null() {
            return null_arg("u");
        }
        if k.is_null() {
            return null_arg("k");
        }
        if out.is_null() {
            return null_arg("out");
        }
        if len != h.tf.grid().len() {
            set_last_error(format!(
                "sample buffers hold {len} values; this grid needs {}",
                h.tf.grid().len()
            ));
            return QcurvStatus::Mismatch;
        }
        let us = std::slice::from_raw_parts(u, len);
        let ks = std::slice::from_raw_parts(k, len);
        let value = (|| {
            let field = h.tf.forward(us)?;
            Ok(functional_jk(&h.tf, &field, ks, sigma)?.value)
        })();
        match value {
            Ok(v) => {
                *out = v;
                QcurvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Run the curvature flow at the critical exponent from the constant
/// start under the curvature with samples `k` (grid length), for at most
/// `max_steps` steps, and report the outcome.
#[no_mangle]
pub unsafe extern "C" fn qcurv_flow(
    t: *const QcurvTransform,
    sigma: f64,
    k: *const f64,
    len: usize,
    max_steps: usize,
    out: *mut QcurvFlowOutcome,
) -> QcurvStatus {
    guard(|| {
        let Some(h) = t.as_ref() else {
            return null_arg("transform");
        };
        if k.is_null() {
            return null_arg("k");
        }
        if out.is_null() {
            return null_arg("out");
        }
        if len != h.tf.grid().len() {
            set_last_error(format!(
                "curvature buffer holds {len} values; this grid needs {}",
                h.tf.grid().len()
            ));
            return QcurvStatus::Mismatch;
        }
        if max_steps == 0 {
            set_last_error("max_steps must be at least 1");
            return QcurvStatus::InvalidArgument;
        }
        let ks = std::slice::from_raw_parts(k, len);
        let result = (|| {
            let q = critical_exponent(h.tf.n(), sigma)?;
            let u0 = constant_start(&h.tf)?;
            let options = FlowOptions {
                max_steps,
                ..FlowOptions::default()
            };
            flow_run(&h.tf, sigma, &u0, ks, q, None, &options)
        })();
        match result {
            Ok(r) => {
                *out = QcurvFlowOutcome {
                    flow_status: match r.status {
                        FlowStatus::Converged => 0,
                        FlowStatus::Concentrated => 1,
                        FlowStatus::MaxIterations => 2,
                    },
                    steps: r.steps,
                    final_level: r.level_history.last().copied().unwrap_or(f64::NAN),
                    final_gradient_norm: r
                        .gradient_norm_history
                        .last()
                        .copied()
                        .unwrap_or(f64::NAN),
                };
                QcurvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Locate and classify the critical points of the callback curvature on
/// S^n, run the counting analysis, and return the full report as a
/// heap-allocated JSON string (release with [`qcurv_string_free`]).
///
/// `starts == 0` selects the default number of random starts.  With
/// `flag_degenerate == 0` a degenerate critical point aborts the analysis
/// (conservative default); otherwise it is carried along flagged.  The
/// curvature bounds entering the pinching clauses are taken over the
/// located critical set, which contains the global extrema whenever the
/// callback is smooth and the start coverage found them.  The gradient
/// tolerance is relaxed to the geodesic-difference noise floor, since
/// callback derivatives are measured, not analytic.
#[no_mangle]
pub unsafe extern "C" fn qcurv_existence_json(
    n: usize,
    sigma: f64,
    k: QcurvCurvatureFn,
    ctx: *mut c_void,
    starts: usize,
    seed: u64,
    flag_degenerate: c_int,
    out: *mut *mut c_char,
) -> QcurvStatus {
    guard(|| {
        let Some(f) = k else {
            return null_arg("k");
        };
        if out.is_null() {
            return null_arg("out");
        }
        let callback = CallbackK { f, ctx };
        let mut options = FindOptions {
            seed,
            policy: if flag_degenerate != 0 {
                DegeneratePolicy::Flag
            } else {
                DegeneratePolicy::Reject
            },
            gradient_tolerance: 1e-7,
            ..FindOptions::default()
        };
        if starts > 0 {
            options.starts = starts;
        }
        let json = (|| {
            let records = find_critical_points(&callback, n, &options)?;
            if records.is_empty() {
                return Err(Error::degenerate(
                    "no critical points located; the callback may be constant or too rough",
                ));
            }
            let k_max = records.iter().map(|r| r.k_value).fold(f64::MIN, f64::max);
            let k_min = records.iter().map(|r| r.k_value).fold(f64::MAX, f64::min);
            let report = existence_verdict(&records, k_max, k_min, n, sigma)?;
            Ok(serde_json::to_string_pretty(&report)?)
        })();
        match json {
            Ok(text) => {
                let c = CString::new(text).unwrap_or_default();
                *out = c.into_raw();
                QcurvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a string returned by this library.  Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn qcurv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
