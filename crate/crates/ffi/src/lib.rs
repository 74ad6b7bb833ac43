//! C ABI for `ellipse-phase`.
//!
//! Objects are opaque handles created by `*_new` functions and released
//! with the matching `*_free`. Every fallible call returns an [`EpStatus`];
//! on failure a message is available from [`ep_last_error`] on the same
//! thread until the next failing call. Strings returned by the library are
//! NUL-terminated UTF-8 and must be released with [`ep_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ellipse_phase::divisor::DivisorJson;
use ellipse_phase::lemma::{v_constant, VMethod};
use ellipse_phase::synthesis::{eval_f, synthesize_with, PhaseFunctionSpec, SpecJson};
use ellipse_phase::verify::{verify_spec, VerifyOptions};
use ellipse_phase::{Complex64, Error, Lattice, Period, PointValue, SigmaEvaluator};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpStatus {
    Ok = 0,
    /// Malformed or inconsistent input (degenerate lattice, bad JSON, ...).
    InvalidInput = 1,
    /// A numerical routine could not reach its accuracy.
    Numerical = 2,
    Io = 3,
    NullPointer = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpComplex {
    pub re: f64,
    pub im: f64,
}

impl From<EpComplex> for Complex64 {
    fn from(c: EpComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for EpComplex {
    fn from(c: Complex64) -> Self {
        EpComplex { re: c.re, im: c.im }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpValueKind {
    Finite = 0,
    Zero = 1,
    Pole = 2,
}

/// A function value as `ln|w|` and `arg w ∈ (-π, π]`, or a zero/pole marker
/// with its order (in which case `log_mag` is ∓inf and `phase` is 0).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpValue {
    pub kind: EpValueKind,
    pub order: u32,
    pub log_mag: f64,
    pub phase: f64,
}

impl From<PointValue> for EpValue {
    fn from(v: PointValue) -> Self {
        match v {
            PointValue::Finite(v) if v.is_zero() => EpValue::marker(EpValueKind::Zero, 1),
            PointValue::Finite(v) => {
                EpValue { kind: EpValueKind::Finite, order: 0, log_mag: v.log_mag(), phase: v.phase() }
            }
            PointValue::Zero(k) => EpValue::marker(EpValueKind::Zero, k),
            PointValue::Pole(k) => EpValue::marker(EpValueKind::Pole, k),
        }
    }
}

impl EpValue {
    fn marker(kind: EpValueKind, order: u32) -> Self {
        let log_mag = if kind == EpValueKind::Pole { f64::INFINITY } else { f64::NEG_INFINITY };
        EpValue { kind, order, log_mag, phase: 0.0 }
    }
}

/// Opaque period lattice.
pub struct EpLattice(Lattice);

/// Opaque sigma evaluator bound to a lattice.
pub struct EpEvaluator(SigmaEvaluator);

/// Opaque synthesized function together with its evaluator.
pub struct EpSpec {
    spec: PhaseFunctionSpec,
    ev: SigmaEvaluator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Utf8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(Error::Json(e))
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EpStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            match e.exit_code() {
                1 => EpStatus::InvalidInput,
                3 => EpStatus::Io,
                _ => EpStatus::Numerical,
            }
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            EpStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            EpStatus::InvalidInput
        }
        Err(_) => {
            set_error("internal panic".into());
            EpStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8)
}

fn period(j: u8) -> Result<Period, Failure> {
    Ok(Period::try_from(j)?)
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failing call on this thread (empty if none).
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn ep_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn ep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out_lattice` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn ep_lattice_new(p1: EpComplex, p2: EpComplex, out_lattice: *mut *mut EpLattice) -> EpStatus {
    guard(|| {
        let slot = out(out_lattice, "out_lattice")?;
        *slot = Box::into_raw(Box::new(EpLattice(Lattice::new(p1.into(), p2.into())?)));
        Ok(())
    })
}

/// # Safety
/// `lattice` must be null or a handle from [`ep_lattice_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ep_lattice_free(lattice: *mut EpLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Reduces `z` into the half-open fundamental cell: `z = z0 + m·p1 + n·p2`.
///
/// # Safety
/// Pointers must be valid; `m` and `n` may be null if not wanted.
#[no_mangle]
pub unsafe extern "C" fn ep_lattice_reduce(
    lattice: *const EpLattice,
    z: EpComplex,
    z0: *mut EpComplex,
    m: *mut i64,
    n: *mut i64,
) -> EpStatus {
    guard(|| {
        let l = &borrow(lattice, "lattice")?.0;
        let cell = l.reduce(z.into());
        *out(z0, "z0")? = cell.z0.into();
        if let Some(m) = m.as_mut() {
            *m = cell.m;
        }
        if let Some(n) = n.as_mut() {
            *n = cell.n;
        }
        Ok(())
    })
}

/// Evaluator using the nome series (`shells == 0`) or the truncated product
/// over `shells` square shells.
///
/// # Safety
/// `lattice` must be a live handle and `out_evaluator` writable.
#[no_mangle]
pub unsafe extern "C" fn ep_evaluator_new(
    lattice: *const EpLattice,
    shells: usize,
    out_evaluator: *mut *mut EpEvaluator,
) -> EpStatus {
    guard(|| {
        let l = &borrow(lattice, "lattice")?.0;
        let slot = out(out_evaluator, "out_evaluator")?;
        let ev = if shells == 0 { SigmaEvaluator::fast(l)? } else { SigmaEvaluator::direct(l, shells)? };
        *slot = Box::into_raw(Box::new(EpEvaluator(ev)));
        Ok(())
    })
}

/// # Safety
/// `ev` must be null or a live evaluator handle.
#[no_mangle]
pub unsafe extern "C" fn ep_evaluator_free(ev: *mut EpEvaluator) {
    if !ev.is_null() {
        drop(Box::from_raw(ev));
    }
}

/// σ(z) in log form; a lattice point yields a zero marker.
///
/// # Safety
/// `ev` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ep_sigma(ev: *const EpEvaluator, z: EpComplex, value: *mut EpValue) -> EpStatus {
    guard(|| {
        let s = borrow(ev, "ev")?.0.sigma(z.into())?;
        *out(value, "value")? = PointValue::Finite(s).into();
        Ok(())
    })
}

/// Quasi-period `η_j` for `j` = 1 or 2.
///
/// # Safety
/// `ev` must be a live handle and `eta` writable.
#[no_mangle]
pub unsafe extern "C" fn ep_eta(ev: *const EpEvaluator, j: u8, eta: *mut EpComplex) -> EpStatus {
    guard(|| {
        let e = borrow(ev, "ev")?.0.eta(period(j)?);
        *out(eta, "eta")? = e.into();
        Ok(())
    })
}

/// `v_j` of the four-sigma identity, from the quasi-period (`shells == 0`)
/// or the symmetrized lattice sum over `shells` shells. `error_bound` may
/// be null.
///
/// # Safety
/// `lattice` must be a live handle and `v` writable.
#[no_mangle]
pub unsafe extern "C" fn ep_v_constant(
    lattice: *const EpLattice,
    xi0: EpComplex,
    j: u8,
    shells: usize,
    v: *mut EpComplex,
    error_bound: *mut f64,
) -> EpStatus {
    guard(|| {
        let l = &borrow(lattice, "lattice")?.0;
        let method = if shells == 0 { VMethod::ViaEta } else { VMethod::DirectSum { shells } };
        let c = v_constant(l, xi0.into(), period(j)?, method)?;
        *out(v, "v")? = c.v.into();
        if let Some(b) = error_bound.as_mut() {
            *b = c.error_bound;
        }
        Ok(())
    })
}

/// Synthesizes `f` from a divisor given as JSON
/// (`{"zeros": [[re, im, mult], ...], "poles": [...]}`) and integers `m1, m2`.
///
/// # Safety
/// `lattice` must be a live handle, `divisor_json` a NUL-terminated string
/// and `out_spec` writable.
#[no_mangle]
pub unsafe extern "C" fn ep_synthesize(
    lattice: *const EpLattice,
    divisor_json: *const c_char,
    m1: i64,
    m2: i64,
    out_spec: *mut *mut EpSpec,
) -> EpStatus {
    guard(|| {
        let l = &borrow(lattice, "lattice")?.0;
        let dj: DivisorJson = serde_json::from_str(text(divisor_json, "divisor_json")?)?;
        let slot = out(out_spec, "out_spec")?;
        let ev = SigmaEvaluator::fast(l)?;
        let spec = synthesize_with(&dj.to_divisor(l)?, m1, m2, &ev)?;
        *slot = Box::into_raw(Box::new(EpSpec { spec, ev }));
        Ok(())
    })
}

/// Loads a spec from the JSON written by [`ep_spec_to_json`] or the CLI.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_spec` writable.
#[no_mangle]
pub unsafe extern "C" fn ep_spec_from_json(json: *const c_char, out_spec: *mut *mut EpSpec) -> EpStatus {
    guard(|| {
        let sj: SpecJson = serde_json::from_str(text(json, "json")?)?;
        let slot = out(out_spec, "out_spec")?;
        let spec = PhaseFunctionSpec::from_json(&sj)?;
        let ev = SigmaEvaluator::fast(&spec.lattice)?;
        *slot = Box::into_raw(Box::new(EpSpec { spec, ev }));
        Ok(())
    })
}

/// # Safety
/// `spec` must be null or a live spec handle.
#[no_mangle]
pub unsafe extern "C" fn ep_spec_free(spec: *mut EpSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// # Safety
/// `spec` must be a live handle and `json` writable. Free the result with
/// [`ep_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ep_spec_to_json(spec: *const EpSpec, json: *mut *mut c_char) -> EpStatus {
    guard(|| {
        let s = borrow(spec, "spec")?;
        let slot = out(json, "json")?;
        *slot = into_c_string(serde_json::to_string(&s.spec.to_json())?);
        Ok(())
    })
}

/// `ξ0`, the exponent `a` and the log-multipliers `α1, α2` of a spec. Any
/// output pointer may be null.
///
/// # Safety
/// `spec` must be a live handle; non-null outputs must be writable, and
/// `alpha` must have room for two doubles.
#[no_mangle]
pub unsafe extern "C" fn ep_spec_params(
    spec: *const EpSpec,
    xi0: *mut EpComplex,
    a: *mut EpComplex,
    alpha: *mut f64,
) -> EpStatus {
    guard(|| {
        let s = &borrow(spec, "spec")?.spec;
        if let Some(x) = xi0.as_mut() {
            *x = s.xi0.into();
        }
        if let Some(x) = a.as_mut() {
            *x = s.a.into();
        }
        if !alpha.is_null() {
            std::slice::from_raw_parts_mut(alpha, 2).copy_from_slice(&s.alpha);
        }
        Ok(())
    })
}

/// `f(z)` of a synthesized spec.
///
/// # Safety
/// `spec` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ep_spec_eval(spec: *const EpSpec, z: EpComplex, value: *mut EpValue) -> EpStatus {
    guard(|| {
        let s = borrow(spec, "spec")?;
        *out(value, "value")? = eval_f(&s.spec, &s.ev, z.into())?.into();
        Ok(())
    })
}

/// Runs the verification harness on an `nx × ny` grid and writes the
/// report as JSON. `passed` (may be null) tells whether every residual met
/// `tol`; a failed check is not an error status.
///
/// # Safety
/// `spec` must be a live handle and `report_json` writable. Free the
/// report with [`ep_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ep_spec_verify(
    spec: *const EpSpec,
    nx: usize,
    ny: usize,
    seed: u64,
    tol: f64,
    report_json: *mut *mut c_char,
    passed: *mut bool,
) -> EpStatus {
    guard(|| {
        let s = borrow(spec, "spec")?;
        let slot = out(report_json, "report_json")?;
        let opts = VerifyOptions { nx, ny, seed, tol, ..VerifyOptions::default() };
        let report = verify_spec(&s.spec, &s.ev, &opts)?;
        if let Some(p) = passed.as_mut() {
            *p = report.passed;
        }
        *slot = into_c_string(serde_json::to_string(&report)?);
        Ok(())
    })
}
