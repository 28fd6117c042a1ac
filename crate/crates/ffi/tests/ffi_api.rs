use std::ffi::CStr;
use std::ptr;

use setscope::spectra::{analyze, Tolerances};
use setscope::{ModelParams, Sector, Sign};
use setscope_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(setscope_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn model(km: i32, ke: i32, w: f64, detect: i32) -> *mut SetscopeModel {
    let mut m = ptr::null_mut();
    let st = unsafe { setscope_model_new(km, ke, w, detect, &mut m) };
    assert_eq!(st, SetscopeStatus::Ok, "{}", last_error());
    assert!(!m.is_null());
    m
}

fn spectrum(m: *const SetscopeModel, ly: u32) -> *mut SetscopeSpectrum {
    let mut s = ptr::null_mut();
    let st = unsafe { setscope_spectrum_compute(m, ly, &mut s) };
    assert_eq!(st, SetscopeStatus::Ok, "{}", last_error());
    s
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(setscope_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn invalid_parameters_are_reported_with_messages() {
    let mut m = ptr::null_mut();
    let st = unsafe { setscope_model_new(1, 1, 1.5, 0, &mut m) };
    assert_eq!(st, SetscopeStatus::InvalidParameter);
    assert!(m.is_null());
    assert!(last_error().contains('w'), "{}", last_error());

    let st = unsafe { setscope_model_new(2, 1, 0.9, 0, &mut m) };
    assert_eq!(st, SetscopeStatus::InvalidParameter);
    assert!(last_error().contains("km"));

    let st = unsafe { setscope_model_new(1, 1, 0.9, 7, &mut m) };
    assert_eq!(st, SetscopeStatus::InvalidParameter);
}

#[test]
fn null_pointers_are_rejected() {
    let st = unsafe { setscope_model_new(1, 1, 0.9, 0, ptr::null_mut()) };
    assert_eq!(st, SetscopeStatus::NullPointer);
    let mut s = ptr::null_mut();
    let st = unsafe { setscope_spectrum_compute(ptr::null(), 4, &mut s) };
    assert_eq!(st, SetscopeStatus::NullPointer);
    let mut x = 0.0;
    let st = unsafe { setscope_spectrum_lambda0(ptr::null(), &mut x) };
    assert_eq!(st, SetscopeStatus::NullPointer);
    // freeing null is a no-op
    unsafe {
        setscope_model_free(ptr::null_mut());
        setscope_spectrum_free(ptr::null_mut());
    }
}

#[test]
fn perimeter_beyond_capacity_is_a_capacity_error() {
    let m = model(1, 1, 0.9, 0);
    let mut s = ptr::null_mut();
    let st = unsafe { setscope_spectrum_compute(m, 40, &mut s) };
    assert_eq!(st, SetscopeStatus::Capacity);
    assert!(s.is_null());
    unsafe { setscope_model_free(m) };
}

#[test]
fn spectrum_accessors_agree_with_library() {
    let m = model(-1, 1, 0.9, 0);
    let s = spectrum(m, 6);
    let p = ModelParams::new(Sign::Minus, Sign::Plus, 0.9, Sector::E).unwrap();
    let a = analyze(&p, 6, &Tolerances::default()).unwrap();

    let mut lambda0 = 0.0;
    assert_eq!(
        unsafe { setscope_spectrum_lambda0(s, &mut lambda0) },
        SetscopeStatus::Ok
    );
    assert_eq!(lambda0, a.ground.lambda0);

    let mut count = 0usize;
    assert_eq!(
        unsafe { setscope_spectrum_ground_count(s, &mut count) },
        SetscopeStatus::Ok
    );
    assert_eq!(count, a.ground.members.len());

    for (branch, kx) in [
        (0, setscope::spectra::Kx::Zero),
        (1, setscope::spectra::Kx::Pi),
    ] {
        let want = a.curve.branch(kx).unwrap();
        for (k, e) in want.iter().enumerate() {
            let mut got = 0.0;
            let st = unsafe { setscope_spectrum_epsilon(s, branch, k as u32, &mut got) };
            assert_eq!(st, SetscopeStatus::Ok);
            assert_eq!(got, e.as_f64());
        }
    }

    let mut n = 0usize;
    assert_eq!(
        unsafe { setscope_spectrum_eigenvalue_count(s, &mut n) },
        SetscopeStatus::Ok
    );
    assert_eq!(n, 64);
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    let st = unsafe { setscope_spectrum_eigenvalues(s, re.as_mut_ptr(), im.as_mut_ptr(), n) };
    assert_eq!(st, SetscopeStatus::Ok);
    for (i, z) in a.spectra.all_eigenvalues().enumerate() {
        assert_eq!((re[i], im[i]), (z.re, z.im));
    }

    let mut gap = 0.0;
    assert_eq!(
        unsafe { setscope_spectrum_gap(s, 0, 0, &mut gap) },
        SetscopeStatus::Ok
    );
    assert!(gap > 0.0);

    unsafe {
        setscope_spectrum_free(s);
        setscope_model_free(m);
    }
}

#[test]
fn small_buffer_is_refused_without_writing() {
    let m = model(1, 1, 0.9, 0);
    let s = spectrum(m, 4);
    let mut re = vec![7.0; 3];
    let mut im = vec![7.0; 3];
    let st = unsafe { setscope_spectrum_eigenvalues(s, re.as_mut_ptr(), im.as_mut_ptr(), 3) };
    assert_eq!(st, SetscopeStatus::BufferTooSmall);
    assert!(last_error().contains("16"), "{}", last_error());
    assert!(re.iter().chain(&im).all(|&x| x == 7.0));
    unsafe {
        setscope_spectrum_free(s);
        setscope_model_free(m);
    }
}

#[test]
fn missing_branch_and_bad_momentum() {
    // with K_e < 0 the reduced operator spans two columns, so no π branch exists
    let m = model(-1, -1, 0.9, 0);
    let s = spectrum(m, 4);
    let mut x = 0.0;
    let st = unsafe { setscope_spectrum_epsilon(s, 1, 0, &mut x) };
    assert_eq!(st, SetscopeStatus::Unavailable);
    assert!(last_error().contains("unavailable"), "{}", last_error());
    let st = unsafe { setscope_spectrum_epsilon(s, 0, 4, &mut x) };
    assert_eq!(st, SetscopeStatus::InvalidParameter);
    let st = unsafe { setscope_spectrum_epsilon(s, 2, 0, &mut x) };
    assert_eq!(st, SetscopeStatus::InvalidParameter);
    unsafe {
        setscope_spectrum_free(s);
        setscope_model_free(m);
    }
}

#[test]
fn vanishing_sectors_report_infinite_epsilon() {
    // at the fixed point every non-ground eigenvalue is zero
    let m = model(1, 1, 1.0, 0);
    let s = spectrum(m, 4);
    let mut x = 0.0;
    let st = unsafe { setscope_spectrum_epsilon(s, 0, 1, &mut x) };
    assert_eq!(st, SetscopeStatus::Ok);
    assert_eq!(x, f64::INFINITY);
    unsafe {
        setscope_spectrum_free(s);
        setscope_model_free(m);
    }
}

#[test]
fn classify_through_the_c_interface() {
    let m = model(-1, 1, 0.9, 0);
    let lys = [4u32, 6, 8];
    let mut v = SetscopeVerdict::Undetermined;
    let st = unsafe { setscope_classify(m, lys.as_ptr(), lys.len(), 0.05, 0.9, &mut v) };
    assert_eq!(st, SetscopeStatus::Ok, "{}", last_error());
    assert_eq!(v, SetscopeVerdict::Minus);

    let st = unsafe { setscope_classify(m, lys.as_ptr(), 2, 0.05, 0.9, &mut v) };
    assert_eq!(st, SetscopeStatus::InsufficientSamples);

    let odd = [3u32, 5, 7];
    let st = unsafe { setscope_classify(m, odd.as_ptr(), 3, 0.05, 0.9, &mut v) };
    assert_eq!(st, SetscopeStatus::InvalidParameter);
    unsafe { setscope_model_free(m) };

    let m = model(1, 1, 0.9, 1);
    let st = unsafe { setscope_classify(m, lys.as_ptr(), lys.len(), 0.05, 0.9, &mut v) };
    assert_eq!(st, SetscopeStatus::Ok, "{}", last_error());
    assert_eq!(v, SetscopeVerdict::Plus);
    unsafe { setscope_model_free(m) };
}

#[test]
fn generated_header_declares_the_interface() {
    let header = include_str!("../include/setscope.h");
    for name in [
        "setscope_model_new",
        "setscope_model_free",
        "setscope_spectrum_compute_with",
        "setscope_spectrum_eigenvalues",
        "setscope_classify",
        "setscope_last_error",
        "SETSCOPE_STATUS_BUFFER_TOO_SMALL",
        "SETSCOPE_VERDICT_MINUS",
        "typedef struct SetscopeModel SetscopeModel",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
