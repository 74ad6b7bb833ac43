use std::ffi::{CStr, CString};
use std::ptr;

use ellipse_phase_ffi::*;

fn c(re: f64, im: f64) -> EpComplex {
    EpComplex { re, im }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ep_last_error()) }.to_string_lossy().into_owned()
}

fn square() -> *mut EpLattice {
    let mut l = ptr::null_mut();
    assert_eq!(unsafe { ep_lattice_new(c(1.0, 0.0), c(0.0, 1.0), &mut l) }, EpStatus::Ok);
    l
}

#[test]
fn lattice_lifecycle_and_errors() {
    let mut l = ptr::null_mut();
    let status = unsafe { ep_lattice_new(c(1.0, 0.0), c(2.0, 0.0), &mut l) };
    assert_eq!(status, EpStatus::InvalidInput);
    assert!(l.is_null());
    assert!(last_error().contains("DegenerateLattice"));

    let l = square();
    let (mut z0, mut m, mut n) = (c(0.0, 0.0), 0, 0);
    assert_eq!(unsafe { ep_lattice_reduce(l, c(2.25, -0.5), &mut z0, &mut m, &mut n) }, EpStatus::Ok);
    assert_eq!((z0, m, n), (c(0.25, 0.5), 2, -1));
    assert_eq!(unsafe { ep_lattice_reduce(l, c(0.0, 0.0), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()) }, EpStatus::NullPointer);
    unsafe { ep_lattice_free(l) };
    unsafe { ep_lattice_free(ptr::null_mut()) };
}

#[test]
fn sigma_and_eta() {
    let l = square();
    let mut ev = ptr::null_mut();
    assert_eq!(unsafe { ep_evaluator_new(l, 0, &mut ev) }, EpStatus::Ok);
    let mut v = EpValue { kind: EpValueKind::Finite, order: 0, log_mag: 0.0, phase: 0.0 };
    assert_eq!(unsafe { ep_sigma(ev, c(1e-6, 0.0), &mut v) }, EpStatus::Ok);
    assert_eq!(v.kind, EpValueKind::Finite);
    assert!((v.log_mag - (1e-6f64).ln()).abs() < 1e-9);
    assert_eq!(unsafe { ep_sigma(ev, c(3.0, 2.0), &mut v) }, EpStatus::Ok);
    assert_eq!((v.kind, v.order), (EpValueKind::Zero, 1));

    let mut eta = c(0.0, 0.0);
    assert_eq!(unsafe { ep_eta(ev, 1, &mut eta) }, EpStatus::Ok);
    assert!((eta.re - std::f64::consts::PI).abs() < 1e-12 && eta.im.abs() < 1e-12);
    assert_eq!(unsafe { ep_eta(ev, 3, &mut eta) }, EpStatus::InvalidInput);

    let (mut vj, mut bound) = (c(0.0, 0.0), -1.0);
    assert_eq!(unsafe { ep_v_constant(l, c(0.3, 0.2), 1, 100, &mut vj, &mut bound) }, EpStatus::Ok);
    assert!(bound > 0.0);
    assert!(((vj.re + 0.3 * std::f64::consts::PI).powi(2) + (vj.im + 0.2 * std::f64::consts::PI).powi(2)).sqrt() <= bound);
    unsafe {
        ep_evaluator_free(ev);
        ep_lattice_free(l);
    }
}

#[test]
fn synthesize_evaluate_verify() {
    let l = square();
    let divisor = CString::new(r#"{"zeros": [[0.3, 0.4, 1]], "poles": [[0.6, 0.1, 1]]}"#).unwrap();
    let mut spec = ptr::null_mut();
    assert_eq!(unsafe { ep_synthesize(l, divisor.as_ptr(), 0, 1, &mut spec) }, EpStatus::Ok);

    let (mut xi0, mut a, mut alpha) = (c(0.0, 0.0), c(0.0, 0.0), [0.0; 2]);
    assert_eq!(unsafe { ep_spec_params(spec, &mut xi0, &mut a, alpha.as_mut_ptr()) }, EpStatus::Ok);
    assert!((xi0.re - 0.3).abs() < 1e-12 && (xi0.im - 0.7).abs() < 1e-12);

    let mut v0 = EpValue { kind: EpValueKind::Finite, order: 0, log_mag: 0.0, phase: 0.0 };
    let mut v1 = v0;
    assert_eq!(unsafe { ep_spec_eval(spec, c(0.3, 0.4), &mut v0) }, EpStatus::Ok);
    assert_eq!(v0.kind, EpValueKind::Zero);
    assert_eq!(unsafe { ep_spec_eval(spec, c(0.6, 1.1), &mut v0) }, EpStatus::Ok);
    assert_eq!(v0.kind, EpValueKind::Pole);
    assert_eq!(unsafe { ep_spec_eval(spec, c(0.15, 0.8), &mut v0) }, EpStatus::Ok);
    assert_eq!(unsafe { ep_spec_eval(spec, c(0.15, 1.8), &mut v1) }, EpStatus::Ok);
    assert!((v1.phase - v0.phase).abs() < 1e-8);
    assert!((v1.log_mag - v0.log_mag - alpha[1]).abs() < 1e-8);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ep_spec_to_json(spec, &mut json) }, EpStatus::Ok);
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { ep_spec_from_json(json, &mut again) }, EpStatus::Ok);
    unsafe { ep_string_free(json) };

    let mut report = ptr::null_mut();
    let mut passed = false;
    assert_eq!(unsafe { ep_spec_verify(again, 5, 5, 42, 1e-6, &mut report, &mut passed) }, EpStatus::Ok);
    assert!(passed);
    let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"zero_count\":1"), "{text}");
    unsafe {
        ep_string_free(report);
        ep_spec_free(again);
        ep_spec_free(spec);
        ep_lattice_free(l);
    }
}

#[test]
fn invalid_divisors() {
    let l = square();
    let mut spec = ptr::null_mut();
    let unbalanced = CString::new(r#"{"zeros": [[0.3, 0.4]]}"#).unwrap();
    assert_eq!(unsafe { ep_synthesize(l, unbalanced.as_ptr(), 0, 0, &mut spec) }, EpStatus::InvalidInput);
    assert!(last_error().contains("UnbalancedDivisor"));
    let garbage = CString::new("not json").unwrap();
    assert_eq!(unsafe { ep_synthesize(l, garbage.as_ptr(), 0, 0, &mut spec) }, EpStatus::InvalidInput);
    assert_eq!(unsafe { ep_synthesize(l, ptr::null(), 0, 0, &mut spec) }, EpStatus::NullPointer);
    assert!(spec.is_null());
    unsafe { ep_lattice_free(l) };
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ellipse_phase.h")).unwrap();
    for name in [
        "ep_last_error", "ep_string_free", "ep_lattice_new", "ep_lattice_free", "ep_lattice_reduce",
        "ep_evaluator_new", "ep_evaluator_free", "ep_sigma", "ep_eta", "ep_v_constant", "ep_synthesize",
        "ep_spec_from_json", "ep_spec_to_json", "ep_spec_free", "ep_spec_params", "ep_spec_eval", "ep_spec_verify",
        "typedef struct EpSpec EpSpec", "EP_STATUS_OK",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
