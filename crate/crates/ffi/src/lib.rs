//! C interface to the maxbisect core.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free`. Every function returns an [`MbStatus`]; on failure
//! `mb_last_error()` describes the most recent error on the calling thread.
//! Strings returned to C are freed with `mb_string_free`.

use maxbisect::blueprint::{builtin_dstar, format, Blueprint, ThresholdFunction};
use maxbisect::certifier::{self, Certificate, Replay, Status};
use maxbisect::rigor::{self, Constants, Interval, RigorConfig};
use maxbisect::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Invalid = 4,
    Io = 5,
    /// The call succeeded but the certificate or replay did not verify.
    NotVerified = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Closed interval [lo, hi].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MbInterval {
    pub lo: f64,
    pub hi: f64,
}

impl From<Interval> for MbInterval {
    fn from(x: Interval) -> Self {
        MbInterval { lo: x.lo(), hi: x.hi() }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MbConstants {
    pub alpha_gw: MbInterval,
    pub b_gw: MbInterval,
    pub c_gw: MbInterval,
}

pub struct MbBlueprint(Blueprint);
pub struct MbCertificate(Certificate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MbStatus {
    match e {
        Error::Parse { .. } | Error::Format(_) => MbStatus::Parse,
        Error::Io(_) => MbStatus::Io,
        _ => MbStatus::Invalid,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<MbStatus, (MbStatus, String)>) -> MbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            MbStatus::Panic
        }
    }
}

fn core(e: Error) -> (MbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (MbStatus, String) {
    (MbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (MbStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (MbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (MbStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (MbStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread; valid until the next
/// failure on the same thread.
#[no_mangle]
pub extern "C" fn mb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn mb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out_constants` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mb_constants(out_constants: *mut MbConstants) -> MbStatus {
    guard(|| {
        let o = out(out_constants, "out_constants")?;
        let k = Constants::compute(&RigorConfig::default());
        *o = MbConstants { alpha_gw: k.alpha_gw.into(), b_gw: k.b_gw.into(), c_gw: k.c_gw.into() };
        Ok(MbStatus::Ok)
    })
}

/// Enclosure of Γ_ρ(q1, q2) for point arguments.
///
/// # Safety
/// `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mb_gamma(rho: f64, q1: f64, q2: f64, out_value: *mut MbInterval) -> MbStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        let ok = |x: f64, lo: f64| x.is_finite() && (lo..=1.0).contains(&x);
        if !(ok(rho, -1.0) && ok(q1, 0.0) && ok(q2, 0.0)) {
            return Err((MbStatus::OutOfRange, "need rho in [-1, 1] and q1, q2 in [0, 1]".into()));
        }
        let p = Interval::point;
        *o = rigor::gamma(p(rho), p(q1), p(q2), &RigorConfig::default()).into();
        Ok(MbStatus::Ok)
    })
}

/// The built-in blueprint 𝒟*.
///
/// # Safety
/// `out_bp` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mb_blueprint_dstar(out_bp: *mut *mut MbBlueprint) -> MbStatus {
    guard(|| {
        let o = out(out_bp, "out_bp")?;
        *o = Box::into_raw(Box::new(MbBlueprint(builtin_dstar(&RigorConfig::default()))));
        Ok(MbStatus::Ok)
    })
}

/// Parses a blueprint file's contents.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out_bp` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mb_blueprint_parse(text_in: *const c_char, out_bp: *mut *mut MbBlueprint) -> MbStatus {
    guard(|| {
        let o = out(out_bp, "out_bp")?;
        *o = ptr::null_mut();
        let spec = format::parse(text(text_in, "text")?).map_err(core)?;
        let bp = Blueprint::from_spec(spec, &RigorConfig::default()).map_err(core)?;
        *o = Box::into_raw(Box::new(MbBlueprint(bp)));
        Ok(MbStatus::Ok)
    })
}

/// # Safety
/// `bp` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mb_blueprint_free(bp: *mut MbBlueprint) {
    if !bp.is_null() {
        drop(Box::from_raw(bp));
    }
}

/// Number of biases, or 0 for a null handle.
///
/// # Safety
/// `bp` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mb_blueprint_len(bp: *const MbBlueprint) -> usize {
    bp.as_ref().map_or(0, |b| b.0.len())
}

/// # Safety
/// `bp` must be a live handle; `out_value` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mb_blueprint_completeness(bp: *const MbBlueprint, out_value: *mut MbInterval) -> MbStatus {
    guard(|| {
        let b = handle(bp, "bp")?;
        *out(out_value, "out_value")? = b.0.completeness().into();
        Ok(MbStatus::Ok)
    })
}

/// Soundness and balance residual at threshold values t[0..n], one per bias
/// in blueprint order.
///
/// # Safety
/// `bp` must be a live handle, `t` must point to `n` doubles and the outputs
/// must be valid for writes (`out_balance` may be null).
#[no_mangle]
pub unsafe extern "C" fn mb_blueprint_soundness(
    bp: *const MbBlueprint,
    t: *const f64,
    n: usize,
    out_value: *mut MbInterval,
    out_balance: *mut MbInterval,
) -> MbStatus {
    guard(|| {
        let b = handle(bp, "bp")?;
        if t.is_null() {
            return Err(null("t"));
        }
        if n != b.0.len() {
            return Err((MbStatus::OutOfRange, format!("expected {} thresholds, got {n}", b.0.len())));
        }
        let values = std::slice::from_raw_parts(t, n);
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err((MbStatus::OutOfRange, "thresholds must lie in [-1, 1]".into()));
        }
        let tf = ThresholdFunction::from_points(values).map_err(core)?;
        *out(out_value, "out_value")? = b.0.soundness_at(&tf).into();
        if let Some(o) = out_balance.as_mut() {
            *o = b.0.balance_residual(&tf).into();
        }
        Ok(MbStatus::Ok)
    })
}

/// Runs the certifier. Returns `Ok` when verified and `NotVerified`
/// otherwise; in both cases `*out_cert` receives the certificate.
///
/// # Safety
/// `bp` must be a live handle; `out_cert` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mb_certify(
    bp: *const MbBlueprint,
    bound: f64,
    max_depth: u32,
    out_cert: *mut *mut MbCertificate,
) -> MbStatus {
    guard(|| {
        let b = handle(bp, "bp")?;
        let o = out(out_cert, "out_cert")?;
        *o = ptr::null_mut();
        let opts = certifier::CertifyOptions::new(bound, max_depth);
        let cert = certifier::certify_with(&b.0, &opts, None, |_| {}).map_err(core)?;
        let verified = cert.status == Status::Verified;
        *o = Box::into_raw(Box::new(MbCertificate(cert)));
        Ok(if verified { MbStatus::Ok } else { MbStatus::NotVerified })
    })
}

/// # Safety
/// `text` must be NUL-terminated; `out_cert` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mb_certificate_parse(text_in: *const c_char, out_cert: *mut *mut MbCertificate) -> MbStatus {
    guard(|| {
        let o = out(out_cert, "out_cert")?;
        *o = ptr::null_mut();
        let cert = Certificate::parse(text(text_in, "text")?).map_err(core)?;
        *o = Box::into_raw(Box::new(MbCertificate(cert)));
        Ok(MbStatus::Ok)
    })
}

/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mb_certificate_free(cert: *mut MbCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// 1 if the certificate claims verification, 0 otherwise (including null).
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mb_certificate_verified(cert: *const MbCertificate) -> i32 {
    cert.as_ref().map_or(0, |c| (c.0.status == Status::Verified) as i32)
}

/// Number of verified regions, or 0 for a null handle.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mb_certificate_regions(cert: *const MbCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.0.regions.len())
}

/// Largest s/c_GW upper bound over the verified regions.
///
/// # Safety
/// `cert` must be a live handle; `out_ratio` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mb_certificate_max_ratio(cert: *const MbCertificate, out_ratio: *mut f64) -> MbStatus {
    guard(|| {
        *out(out_ratio, "out_ratio")? = handle(cert, "cert")?.0.max_ratio();
        Ok(MbStatus::Ok)
    })
}

/// Serialized certificate; free with `mb_string_free`.
///
/// # Safety
/// `cert` must be a live handle; `out_text` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mb_certificate_to_text(cert: *const MbCertificate, out_text: *mut *mut c_char) -> MbStatus {
    guard(|| {
        let c = handle(cert, "cert")?;
        let o = out(out_text, "out_text")?;
        *o = CString::new(c.0.to_text()).map_err(|e| (MbStatus::Invalid, e.to_string()))?.into_raw();
        Ok(MbStatus::Ok)
    })
}

/// Independent re-check against `bp`, re-evaluating every `stride`-th
/// region (0 or 1 for all). `Ok` iff the replay verifies; the reason for a
/// mismatch is available from `mb_last_error`.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn mb_certificate_replay(
    cert: *const MbCertificate,
    bp: *const MbBlueprint,
    stride: usize,
) -> MbStatus {
    guard(|| {
        let c = handle(cert, "cert")?;
        let b = handle(bp, "bp")?;
        match certifier::replay_sampled(&c.0, &b.0, stride.max(1)).map_err(core)? {
            Replay::Verified => Ok(MbStatus::Ok),
            Replay::Mismatch { index, reason } => {
                set_error(&match index {
                    Some(k) => format!("region {k}: {reason}"),
                    None => reason,
                });
                Ok(MbStatus::NotVerified)
            }
        }
    })
}
