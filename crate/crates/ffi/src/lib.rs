//! C ABI over `zeta-detect`.
//!
//! Handles are opaque and owned by the caller; free each with its `_free`
//! function. Every entry point returns a status code and writes results
//! through out-pointers. On failure the message is available from
//! `zd_last_error_message` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use zeta_detect::arith::{sieve_tables, ArithTables};
use zeta_detect::detectors::{dichotomy_check, explicit_formula_residual, prime_sum_s};
use zeta_detect::params::ScaleParams;
use zeta_detect::powersum::{gen_vertical_ap, power_sum_search};
use zeta_detect::weights::BumpWeight;
use zeta_detect::zerosets::{Zero, ZeroSet, ZeroSetSource};
use zeta_detect::{fixtures, Error};

pub const ZD_OK: i32 = 0;
pub const ZD_ERR_NULL: i32 = 1;
pub const ZD_ERR_CONFIG: i32 = 2;
pub const ZD_ERR_RANGE: i32 = 3;
pub const ZD_ERR_PRECONDITION: i32 = 4;
pub const ZD_ERR_INPUT: i32 = 5;
pub const ZD_ERR_RESOURCE: i32 = 6;
/// Construction, invariant or numerical failure of a checked claim.
pub const ZD_ERR_ASSERTION: i32 = 7;
pub const ZD_ERR_IO: i32 = 8;
pub const ZD_ERR_PANIC: i32 = 9;

pub struct ZdWeight(BumpWeight);
pub struct ZdTables(ArithTables);
pub struct ZdZeroSet(ZeroSet);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct ZdComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ZdComplex {
    fn from(z: Complex64) -> Self {
        ZdComplex { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct ZdResidual {
    pub residual: f64,
    pub tail_bound: f64,
    pub zeros_in_window: usize,
    pub within_bound: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct ZdDichotomy {
    pub indicator: f64,
    pub type1_magnitude: f64,
    pub type2_magnitude: f64,
    pub best_n: u64,
    pub type1_passed: bool,
    pub type2_passed: bool,
    pub identity_holds: bool,
    pub passed: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct ZdSearch {
    pub t_star: f64,
    pub value: f64,
    pub certified_gap: f64,
    pub grid_points: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => ZD_ERR_CONFIG,
        Error::Range { .. } => ZD_ERR_RANGE,
        Error::Precondition(_) | Error::NotHalfIsolated { .. } => ZD_ERR_PRECONDITION,
        Error::Parse { .. } | Error::Input(_) | Error::Json(_) => ZD_ERR_INPUT,
        Error::Resource { .. } => ZD_ERR_RESOURCE,
        Error::Io(_) => ZD_ERR_IO,
        Error::Construction { .. } | Error::Invariant(_) | Error::Numeric(_) => ZD_ERR_ASSERTION,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZD_OK,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            ZD_ERR_NULL
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            code(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ZD_ERR_PANIC
        }
    }
}

unsafe fn href<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn zd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zd_weight_new(out: *mut *mut ZdWeight) -> i32 {
    guard(|| {
        let o = unsafe { self::out(out, "out") }?;
        *o = boxed(ZdWeight(BumpWeight::new()));
        Ok(())
    })
}

/// # Safety
/// `w` must come from `zd_weight_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn zd_weight_free(w: *mut ZdWeight) {
    if !w.is_null() {
        drop(unsafe { Box::from_raw(w) });
    }
}

/// w₀(x).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn zd_weight_eval(w: *const ZdWeight, x: f64, value: *mut f64) -> i32 {
    guard(|| {
        let w = unsafe { href(w, "weight") }?;
        let v = unsafe { out(value, "value") }?;
        *v = w.0.eval_w0(x);
        Ok(())
    })
}

/// W₀(s) with its error estimate.
///
/// # Safety
/// Pointers must be valid; `err` may be null.
#[no_mangle]
pub unsafe extern "C" fn zd_mellin_w0(w: *const ZdWeight, s: ZdComplex, value: *mut ZdComplex, err: *mut f64) -> i32 {
    guard(|| {
        let w = unsafe { href(w, "weight") }?;
        let v = unsafe { out(value, "value") }?;
        let m = w.0.mellin_w0(Complex64::new(s.re, s.im))?;
        *v = m.value.into();
        if let Some(e) = unsafe { err.as_mut() } {
            *e = m.estimated_error;
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zd_tables_new(limit: usize, out: *mut *mut ZdTables) -> i32 {
    guard(|| {
        let o = unsafe { self::out(out, "out") }?;
        *o = boxed(ZdTables(sieve_tables(limit)?));
        Ok(())
    })
}

/// # Safety
/// `t` must come from `zd_tables_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn zd_tables_free(t: *mut ZdTables) {
    if !t.is_null() {
        drop(unsafe { Box::from_raw(t) });
    }
}

/// Λ(n), μ(n) for n ≤ limit.
///
/// # Safety
/// Pointers must be valid; either output may be null.
#[no_mangle]
pub unsafe extern "C" fn zd_tables_lookup(t: *const ZdTables, n: usize, lambda: *mut f64, mu: *mut i8) -> i32 {
    guard(|| {
        let t = unsafe { href(t, "tables") }?;
        if n == 0 || n > t.0.limit() {
            return Err(Error::Range {
                what: "n",
                value: n as f64,
                range: format!("[1, {}]", t.0.limit()),
            }
            .into());
        }
        if let Some(l) = unsafe { lambda.as_mut() } {
            *l = t.0.lambda(n);
        }
        if let Some(m) = unsafe { mu.as_mut() } {
            *m = t.0.mu(n);
        }
        Ok(())
    })
}

/// S_Y(s) = Σ Λ(n) n^{-s} w₀(n/Y).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn zd_prime_sum(
    t: *const ZdTables,
    w: *const ZdWeight,
    s: ZdComplex,
    y: f64,
    value: *mut ZdComplex,
) -> i32 {
    guard(|| {
        let t = unsafe { href(t, "tables") }?;
        let w = unsafe { href(w, "weight") }?;
        let v = unsafe { out(value, "value") }?;
        *v = prime_sum_s(Complex64::new(s.re, s.im), y, &t.0, &w.0)?.into();
        Ok(())
    })
}

/// The bundled table of zeta zeros.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zd_zeros_fixture(out: *mut *mut ZdZeroSet) -> i32 {
    guard(|| {
        let o = unsafe { self::out(out, "out") }?;
        *o = boxed(ZdZeroSet(fixtures::zeta_fixture()));
        Ok(())
    })
}

/// Synthetic set from parallel arrays, declared complete on every height.
///
/// # Safety
/// `betas` and `gammas` must point to `len` values each (may be null when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn zd_zeros_from_arrays(
    betas: *const f64,
    gammas: *const f64,
    len: usize,
    out: *mut *mut ZdZeroSet,
) -> i32 {
    guard(|| {
        let o = unsafe { self::out(out, "out") }?;
        let (b, g): (&[f64], &[f64]) = if len == 0 {
            (&[], &[])
        } else {
            if betas.is_null() {
                return Err(Fail::Null("betas"));
            }
            if gammas.is_null() {
                return Err(Fail::Null("gammas"));
            }
            unsafe { (std::slice::from_raw_parts(betas, len), std::slice::from_raw_parts(gammas, len)) }
        };
        let zeros = b.iter().zip(g).map(|(&b, &g)| Zero::new(b, g)).collect::<Result<Vec<_>, _>>()?;
        let (mut zs, _) = ZeroSet::from_zeros(zeros, ZeroSetSource::Synthetic);
        zs = zs.with_complete_range(0.0, f64::INFINITY)?;
        zs.infer_lines();
        *o = boxed(ZdZeroSet(zs));
        Ok(())
    })
}

/// # Safety
/// `z` must come from a `zd_zeros_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn zd_zeros_free(z: *mut ZdZeroSet) {
    if !z.is_null() {
        drop(unsafe { Box::from_raw(z) });
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn zd_zeros_len(z: *const ZdZeroSet, len: *mut usize) -> i32 {
    guard(|| {
        let z = unsafe { href(z, "zeros") }?;
        *unsafe { out(len, "len") }? = z.0.len();
        Ok(())
    })
}

/// β and γ of the zero at `index` (sorted by γ).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn zd_zeros_get(z: *const ZdZeroSet, index: usize, beta: *mut f64, gamma: *mut f64) -> i32 {
    guard(|| {
        let z = unsafe { href(z, "zeros") }?;
        let (b, g) = unsafe { (out(beta, "beta")?, out(gamma, "gamma")?) };
        let zero = z.0.get(index)?;
        *b = zero.beta;
        *g = zero.gamma;
        Ok(())
    })
}

/// Explicit-formula residual at the zero `index` with smoothing length `u`, scale T = `t`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn zd_explicit_formula_residual(
    z: *const ZdZeroSet,
    index: usize,
    u: f64,
    t: f64,
    tables: *const ZdTables,
    w: *const ZdWeight,
    result: *mut ZdResidual,
) -> i32 {
    guard(|| {
        let z = unsafe { href(z, "zeros") }?;
        let tables = unsafe { href(tables, "tables") }?;
        let w = unsafe { href(w, "weight") }?;
        let r = unsafe { out(result, "result") }?;
        let p = ScaleParams::new(t)?;
        let res = explicit_formula_residual(&z.0, z.0.get(index)?, u, &tables.0, &w.0, &p)?;
        *r = ZdResidual {
            residual: res.residual,
            tail_bound: res.tail_bound,
            zeros_in_window: res.zeros_in_window,
            within_bound: res.within_bound,
        };
        Ok(())
    })
}

/// Type I / Type II dichotomy at ρ = β + iγ and scale T = `t`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn zd_dichotomy(
    beta: f64,
    gamma: f64,
    t: f64,
    tables: *const ZdTables,
    result: *mut ZdDichotomy,
) -> i32 {
    guard(|| {
        let tables = unsafe { href(tables, "tables") }?;
        let r = unsafe { out(result, "result") }?;
        let p = ScaleParams::new(t)?;
        let d = dichotomy_check(Zero::new(beta, gamma)?, &p, &tables.0)?;
        *r = ZdDichotomy {
            indicator: d.indicator,
            type1_magnitude: d.type1.best.magnitude,
            type2_magnitude: d.type2.value.norm(),
            best_n: d.type1.best.parameter as u64,
            type1_passed: d.type1_passed,
            type2_passed: d.type2_passed,
            identity_holds: d.identity_holds,
            passed: d.passed,
        };
        Ok(())
    })
}

/// Certified max over [A, 2A] of |Σ_{r<R} e^{2πi r t/R}|.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zd_power_sum_vertical_ap(r: usize, a: f64, tolerance: f64, result: *mut ZdSearch) -> i32 {
    guard(|| {
        let o = unsafe { out(result, "result") }?;
        let s = power_sum_search(&gen_vertical_ap(r, a)?, tolerance)?;
        *o = ZdSearch {
            t_star: s.t_star,
            value: s.value,
            certified_gap: s.certified_gap,
            grid_points: s.grid_points,
        };
        Ok(())
    })
}
