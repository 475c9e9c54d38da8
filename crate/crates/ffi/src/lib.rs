//! C ABI over `dp_laplace`. Profiles and Rényi curves are opaque heap handles;
//! every fallible call returns a [`DplStatus`] and writes results through out
//! pointers. The message for the last failure on the calling thread is kept
//! until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::ptr;

use dp_laplace::composition::{compose_homogeneous, compose_point_guarantees, eps_for_delta, PointGuarantee};
use dp_laplace::core::{reverse_profile, PrivacyProfile, RenyiCurve};
use dp_laplace::laplace::{profile_from_renyi, renyi_curve_from_profile, BromwichConfig};
use dp_laplace::mechanisms::{gaussian_profile_curve, gaussian_renyi_curve, rr_profile_curve, rr_renyi_curve, RRParams};
use dp_laplace::subsampling::{poisson_subsample_profile, SubsampleParams};
use dp_laplace::Error;
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DplStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    EmptyRoc = 3,
    Divergence = 4,
    NonConvergence = 5,
    ResourceLimit = 6,
    NoCrossing = 7,
    MethodInapplicable = 8,
    Panic = 9,
}

/// Opaque privacy profile.
pub struct DplProfile(PrivacyProfile);

/// Opaque Rényi curve.
pub struct DplRenyiCurve(RenyiCurve);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DplStatus {
    match e {
        Error::InvalidDistribution(_)
        | Error::InvalidParameter(_)
        | Error::DegenerateKappa(_)
        | Error::SingularOrder(_)
        | Error::InvalidPld(_) => DplStatus::InvalidParameter,
        Error::EmptyRoc => DplStatus::EmptyRoc,
        Error::Divergence(_) => DplStatus::Divergence,
        Error::NonConvergence(_) => DplStatus::NonConvergence,
        Error::BookOverflow { .. } | Error::SupportOverflow { .. } => DplStatus::ResourceLimit,
        Error::NoCrossing { .. } => DplStatus::NoCrossing,
        Error::GridMismatch(_) | Error::Reconstruction(_) => DplStatus::MethodInapplicable,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> DplStatus {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(())) => DplStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            DplStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            set_error("null pointer argument".into());
            return DplStatus::NullPointer;
        }
    };
}

unsafe fn boxed_profile(out: *mut *mut DplProfile, p: PrivacyProfile) {
    *out = Box::into_raw(Box::new(DplProfile(p)));
}

unsafe fn boxed_curve(out: *mut *mut DplRenyiCurve, c: RenyiCurve) {
    *out = Box::into_raw(Box::new(DplRenyiCurve(c)));
}

/// Message for the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn dpl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Gaussian mechanism with κ = Δ²/(2σ²).
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dpl_profile_gaussian(kappa: f64, out: *mut *mut DplProfile) -> DplStatus {
    non_null!(out);
    guard(|| {
        boxed_profile(out, gaussian_profile_curve(kappa)?);
        Ok(())
    })
}

/// Randomized response with parameters (ε₀, δ₀).
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dpl_profile_randomized_response(eps0: f64, delta0: f64, out: *mut *mut DplProfile) -> DplStatus {
    non_null!(out);
    guard(|| {
        boxed_profile(out, rr_profile_curve(RRParams::new(eps0, delta0)?)?);
        Ok(())
    })
}

/// Poisson subsampling at rate `lambda` (remove direction).
///
/// # Safety
/// `prof` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dpl_profile_subsample(prof: *const DplProfile, lambda: f64, out: *mut *mut DplProfile) -> DplStatus {
    non_null!(prof, out);
    let p = &(*prof).0;
    guard(|| {
        boxed_profile(out, poisson_subsample_profile(p, SubsampleParams::new(lambda)?)?);
        Ok(())
    })
}

/// Profile of the swapped pair.
///
/// # Safety
/// `prof` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dpl_profile_reverse(prof: *const DplProfile, out: *mut *mut DplProfile) -> DplStatus {
    non_null!(prof, out);
    let p = &(*prof).0;
    guard(|| {
        boxed_profile(out, reverse_profile(p));
        Ok(())
    })
}

/// δ(ε).
///
/// # Safety
/// `prof` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dpl_profile_eval(prof: *const DplProfile, eps: f64, out: *mut f64) -> DplStatus {
    non_null!(prof, out);
    let p = &(*prof).0;
    guard(|| {
        *out = p.eval(eps);
        Ok(())
    })
}

/// Smallest ε in [lo, hi] with δ(ε) ≤ `budget`; `DPL_STATUS_NO_CROSSING` if δ(hi) is still above it.
///
/// # Safety
/// `prof` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dpl_profile_eps_for_delta(
    prof: *const DplProfile,
    budget: f64,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> DplStatus {
    non_null!(prof, out);
    let p = &(*prof).0;
    guard(|| {
        *out = eps_for_delta(|e| p.eval(e), budget, (lo, hi))?;
        Ok(())
    })
}

/// Releases a profile handle. NULL is ignored.
///
/// # Safety
/// `prof` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dpl_profile_free(prof: *mut DplProfile) {
    if !prof.is_null() {
        drop(Box::from_raw(prof));
    }
}

/// Composed profile of `n` point guarantees at ε = `t`.
///
/// # Safety
/// `eps0` and `delta0` must point to `n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn dpl_compose_point_guarantees(
    eps0: *const f64,
    delta0: *const f64,
    n: usize,
    t: f64,
    out: *mut f64,
) -> DplStatus {
    non_null!(eps0, delta0, out);
    let (e, d) = (std::slice::from_raw_parts(eps0, n), std::slice::from_raw_parts(delta0, n));
    guard(|| {
        let gs = e.iter().zip(d).map(|(&e, &d)| PointGuarantee::new(e, d)).collect::<Result<Vec<_>, _>>()?;
        *out = compose_point_guarantees(&gs, t)?;
        Ok(())
    })
}

/// `k`-fold composition of one (ε₀, δ₀) guarantee at ε = `t`.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dpl_compose_homogeneous(eps0: f64, delta0: f64, k: u32, t: f64, out: *mut f64) -> DplStatus {
    non_null!(out);
    guard(|| {
        PointGuarantee::new(eps0, delta0)?;
        *out = compose_homogeneous(eps0, delta0, k, t);
        Ok(())
    })
}

/// Rényi curve of a profile via the forward transform.
///
/// # Safety
/// `prof` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dpl_renyi_from_profile(prof: *const DplProfile, out: *mut *mut DplRenyiCurve) -> DplStatus {
    non_null!(prof, out);
    let p = &(*prof).0;
    guard(|| {
        boxed_curve(out, renyi_curve_from_profile(p)?);
        Ok(())
    })
}

/// Closed-form Gaussian Rényi curve.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dpl_renyi_gaussian(kappa: f64, out: *mut *mut DplRenyiCurve) -> DplStatus {
    non_null!(out);
    guard(|| {
        boxed_curve(out, gaussian_renyi_curve(kappa)?);
        Ok(())
    })
}

/// Closed-form Rényi curve of randomized response with δ₀ = 0.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dpl_renyi_rr(eps0: f64, out: *mut *mut DplRenyiCurve) -> DplStatus {
    non_null!(out);
    guard(|| {
        boxed_curve(out, rr_renyi_curve(eps0)?);
        Ok(())
    })
}

/// ρ(q) at a complex order; the real and imaginary parts go to `out_re`, `out_im`.
///
/// # Safety
/// `curve` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dpl_renyi_eval(
    curve: *const DplRenyiCurve,
    q_re: f64,
    q_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DplStatus {
    non_null!(curve, out_re, out_im);
    let c = &(*curve).0;
    guard(|| {
        let r = c.rho(Complex64::new(q_re, q_im))?;
        *out_re = r.re;
        *out_im = r.im;
        Ok(())
    })
}

/// δ(ε) recovered from a Rényi curve along Re(s) = `gamma`.
///
/// # Safety
/// `curve` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dpl_renyi_to_profile(
    curve: *const DplRenyiCurve,
    eps: f64,
    gamma: f64,
    out: *mut f64,
) -> DplStatus {
    non_null!(curve, out);
    let c = &(*curve).0;
    guard(|| {
        *out = profile_from_renyi(c, eps, &BromwichConfig { gamma, ..Default::default() })?;
        Ok(())
    })
}

/// Releases a curve handle. NULL is ignored.
///
/// # Safety
/// `curve` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dpl_renyi_free(curve: *mut DplRenyiCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}
