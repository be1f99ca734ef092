//! C ABI for the `burgers2d` library.
//!
//! Objects are opaque handles created by `*_new` style constructors and
//! released with the matching `*_free`. Fallible calls return a
//! [`B2dStatus`] and write results through out-pointers; after a failure
//! `b2d_last_error_message` describes what went wrong on the calling
//! thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use burgers2d::exactwave::{classify_region, eval_rarefaction};
use burgers2d::solver::Field2D;
use burgers2d::transform::{ellipticity_constant, eval_kab};
use burgers2d::{Curve, Error, Region, RiemannData, ViscousProfile};

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum B2dStatus {
    Ok = 0,
    InvalidArgument = 1,
    HyperbolicityViolated = 2,
    NoConvergence = 3,
    NumericalFailure = 4,
    Io = 5,
    NullPointer = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum B2dRegion {
    Minus = 0,
    Fan = 1,
    Plus = 2,
}

/// Coefficients of the transformed equation at one `xi`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct B2dCoefficients {
    pub xi: f64,
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub k_prime: f64,
    /// Smaller eigenvalue of the diffusion matrix at `xi`.
    pub d: f64,
}

/// Opaque curve handle.
pub struct B2dCurve(Curve);

/// Opaque handle for end states plus curve.
pub struct B2dRiemann(RiemannData);

/// Opaque viscous profile handle.
pub struct B2dProfile(ViscousProfile);

/// Opaque grid field handle.
pub struct B2dField(Field2D);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> B2dStatus {
    match e {
        Error::HyperbolicityViolated { .. } => B2dStatus::HyperbolicityViolated,
        Error::NoConvergence { .. } | Error::QuadratureNotConverged { .. } => B2dStatus::NoConvergence,
        Error::Io(_) => B2dStatus::Io,
        Error::InvalidArgument(_) | Error::Config { .. } | Error::Format(_) | Error::RegionBoundaryTooClose { .. } => {
            B2dStatus::InvalidArgument
        }
        _ => B2dStatus::NumericalFailure,
    }
}

/// Runs `f`, converting errors and panics into a status and recording the
/// message.
fn guard(f: impl FnOnce() -> Result<(), (B2dStatus, String)>) -> B2dStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => B2dStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            B2dStatus::Panic
        }
    }
}

fn lib<T>(r: burgers2d::Result<T>) -> Result<T, (B2dStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (B2dStatus, String)> {
    p.as_ref().ok_or_else(|| (B2dStatus::NullPointer, format!("{name} is null")))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), (B2dStatus, String)> {
    if out.is_null() {
        return Err((B2dStatus::NullPointer, format!("{name} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, (B2dStatus, String)> {
    if p.is_null() {
        return Err((B2dStatus::NullPointer, "path is null".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| (B2dStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn b2d_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn b2d_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn new_curve(r: burgers2d::Result<Curve>, out: *mut *mut B2dCurve) -> B2dStatus {
    guard(|| {
        let c = lib(r)?;
        write(out, Box::into_raw(Box::new(B2dCurve(c))), "out")
    })
}

/// Line `y = k x + c`; needs `k < 1`.
#[no_mangle]
pub unsafe extern "C" fn b2d_curve_line(k: f64, c: f64, out: *mut *mut B2dCurve) -> B2dStatus {
    new_curve(Curve::line(k, c), out)
}

/// Broken line `k1 x + c1` / `k2 x + c2` smoothed over `[-eps0, eps0]`.
#[no_mangle]
pub unsafe extern "C" fn b2d_curve_mollified_polyline(
    k1: f64,
    c1: f64,
    k2: f64,
    c2: f64,
    eps0: f64,
    out: *mut *mut B2dCurve,
) -> B2dStatus {
    new_curve(Curve::mollify_polyline(k1, c1, k2, c2, eps0), out)
}

/// `k x + c + amplitude atan(x / width)`.
#[no_mangle]
pub unsafe extern "C" fn b2d_curve_perturbed_line(
    k: f64,
    c: f64,
    amplitude: f64,
    width: f64,
    out: *mut *mut B2dCurve,
) -> B2dStatus {
    new_curve(Curve::perturbed_line(k, c, amplitude, width), out)
}

#[no_mangle]
pub unsafe extern "C" fn b2d_curve_free(curve: *mut B2dCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// `phi`, `phi'` and `phi''` at `x`; any out-pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn b2d_curve_eval(
    curve: *const B2dCurve,
    x: f64,
    phi: *mut f64,
    dphi: *mut f64,
    ddphi: *mut f64,
) -> B2dStatus {
    guard(|| {
        let jet = deref(curve, "curve")?.0.eval(x);
        for (p, v) in [(phi, jet.phi), (dphi, jet.dphi), (ddphi, jet.ddphi)] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Hyperbolicity margin `d0`.
#[no_mangle]
pub unsafe extern "C" fn b2d_curve_d0(curve: *const B2dCurve, out: *mut f64) -> B2dStatus {
    guard(|| write(out, deref(curve, "curve")?.0.d0(), "out"))
}

/// `Z(x, y)`, the root of `y - Z = phi(x - Z)`.
#[no_mangle]
pub unsafe extern "C" fn b2d_curve_solve_z(curve: *const B2dCurve, x: f64, y: f64, out: *mut f64) -> B2dStatus {
    guard(|| {
        let z = lib(deref(curve, "curve")?.0.z(x, y))?;
        write(out, z, "out")
    })
}

/// `G(xi)`, the root of `G - phi(G) = xi`.
#[no_mangle]
pub unsafe extern "C" fn b2d_curve_solve_g(curve: *const B2dCurve, xi: f64, out: *mut f64) -> B2dStatus {
    guard(|| {
        let g = lib(deref(curve, "curve")?.0.g(xi))?;
        write(out, g, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn b2d_coefficients(curve: *const B2dCurve, xi: f64, out: *mut B2dCoefficients) -> B2dStatus {
    guard(|| {
        let c = lib(eval_kab(&deref(curve, "curve")?.0, xi))?;
        write(out, B2dCoefficients { xi: c.xi, k: c.k, a: c.a, b: c.b, k_prime: c.k_prime, d: c.d }, "out")
    })
}

/// Ellipticity constant of the curve.
#[no_mangle]
pub unsafe extern "C" fn b2d_ellipticity_constant(curve: *const B2dCurve, out: *mut f64) -> B2dStatus {
    guard(|| write(out, ellipticity_constant(&deref(curve, "curve")?.0), "out"))
}

/// End states `u_minus < u_plus` over a copy of `curve`.
#[no_mangle]
pub unsafe extern "C" fn b2d_riemann_new(
    u_minus: f64,
    u_plus: f64,
    curve: *const B2dCurve,
    out: *mut *mut B2dRiemann,
) -> B2dStatus {
    guard(|| {
        let d = lib(RiemannData::new(u_minus, u_plus, deref(curve, "curve")?.0))?;
        write(out, Box::into_raw(Box::new(B2dRiemann(d))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn b2d_riemann_free(data: *mut B2dRiemann) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Inviscid wave at `(t, x, y)`, `t > 0`.
#[no_mangle]
pub unsafe extern "C" fn b2d_rarefaction_eval(data: *const B2dRiemann, t: f64, x: f64, y: f64, out: *mut f64) -> B2dStatus {
    guard(|| {
        let u = lib(eval_rarefaction(&deref(data, "data")?.0, t, x, y))?;
        write(out, u, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn b2d_classify_region(
    data: *const B2dRiemann,
    t: f64,
    x: f64,
    y: f64,
    out: *mut B2dRegion,
) -> B2dStatus {
    guard(|| {
        let r = match lib(classify_region(&deref(data, "data")?.0, t, x, y))? {
            Region::Minus => B2dRegion::Minus,
            Region::Fan => B2dRegion::Fan,
            Region::Plus => B2dRegion::Plus,
        };
        write(out, r, "out")
    })
}

/// Viscous profile with the smooth initial datum `w0` joining `u_minus`
/// and `u_plus`.
#[no_mangle]
pub unsafe extern "C" fn b2d_profile_new(u_minus: f64, u_plus: f64, out: *mut *mut B2dProfile) -> B2dStatus {
    guard(|| {
        let p = lib(ViscousProfile::new(u_minus, u_plus))?;
        write(out, Box::into_raw(Box::new(B2dProfile(p))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn b2d_profile_free(profile: *mut B2dProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

#[no_mangle]
pub unsafe extern "C" fn b2d_profile_w0(profile: *const B2dProfile, eta: f64, out: *mut f64) -> B2dStatus {
    guard(|| write(out, deref(profile, "profile")?.0.w0(eta), "out"))
}

/// Inviscid solution `w(t, eta)` with datum `w0`.
#[no_mangle]
pub unsafe extern "C" fn b2d_profile_eval_w(profile: *const B2dProfile, t: f64, eta: f64, out: *mut f64) -> B2dStatus {
    guard(|| {
        let w = lib(deref(profile, "profile")?.0.eval_w(t, eta))?;
        write(out, w, "out")
    })
}

/// Viscous profile `v(t, xi, eta)` for the coefficients of `curve`.
#[no_mangle]
pub unsafe extern "C" fn b2d_profile_eval_v(
    profile: *const B2dProfile,
    t: f64,
    xi: f64,
    eta: f64,
    curve: *const B2dCurve,
    out: *mut f64,
) -> B2dStatus {
    guard(|| {
        let v = lib(deref(profile, "profile")?.0.eval_v(t, xi, eta, &deref(curve, "curve")?.0))?;
        write(out, v, "out")
    })
}

/// Reads a field dump written by the `burgers2d` tool.
#[no_mangle]
pub unsafe extern "C" fn b2d_field_read(path: *const c_char, out: *mut *mut B2dField) -> B2dStatus {
    guard(|| {
        let path = path_arg(path)?;
        let file = File::open(path).map_err(|e| (B2dStatus::Io, format!("{}: {e}", path.display())))?;
        let f = lib(Field2D::read_dump(BufReader::new(file)))?;
        write(out, Box::into_raw(Box::new(B2dField(f))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn b2d_field_write(field: *const B2dField, path: *const c_char) -> B2dStatus {
    guard(|| {
        let f = deref(field, "field")?;
        lib(f.0.save_dump(path_arg(path)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn b2d_field_free(field: *mut B2dField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Node counts and snapshot time; any out-pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn b2d_field_info(field: *const B2dField, n1: *mut usize, n2: *mut usize, time: *mut f64) -> B2dStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        if !n1.is_null() {
            n1.write(f.grid.n1);
        }
        if !n2.is_null() {
            n2.write(f.grid.n2);
        }
        if !time.is_null() {
            time.write(f.time);
        }
        Ok(())
    })
}

/// Bounds `[lo1, hi1] x [lo2, hi2]` of the grid.
#[no_mangle]
pub unsafe extern "C" fn b2d_field_bounds(field: *const B2dField, bounds: *mut [f64; 4]) -> B2dStatus {
    guard(|| {
        let g = deref(field, "field")?.0.grid;
        write(bounds, [g.lo1, g.hi1, g.lo2, g.hi2], "bounds")
    })
}

/// Row-major values (`n1 * n2`, first axis fastest), owned by the field.
#[no_mangle]
pub unsafe extern "C" fn b2d_field_values(field: *const B2dField) -> *const f64 {
    field.as_ref().map_or(ptr::null(), |f| f.0.values.as_ptr())
}
