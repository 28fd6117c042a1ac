//! C ABI over the `setscope` library.
//!
//! Objects are opaque handles created by `*_new` / `*_compute` and released
//! by the matching `*_free`. Every fallible call returns a [`SetscopeStatus`];
//! on failure a description is available from [`setscope_last_error`] on the
//! same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use setscope::classify::{classify_eta, run_sector, ClassifierConfig, Verdict};
use setscope::spectra::{analyze, Kx, SectorAnalysis, Tolerances};
use setscope::{Error, ModelParams, Sector, Sign};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetscopeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Capacity = 3,
    NumericalFailure = 4,
    Unavailable = 5,
    InsufficientSamples = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A fractionalization verdict.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetscopeVerdict {
    Undetermined = 0,
    Plus = 1,
    Minus = -1,
}

/// Model parameters: signs, `w` and the detected sector.
pub struct SetscopeModel {
    params: ModelParams,
}

/// Spectrum, ground set, SCL minima and gaps at one perimeter.
pub struct SetscopeSpectrum {
    analysis: SectorAnalysis,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> SetscopeStatus {
    match err {
        Error::InvalidParameter { .. }
        | Error::IncompatibleExtent(_)
        | Error::InvalidMomentum(_)
        | Error::DimensionMismatch { .. }
        | Error::UndefinedForOdd(_) => SetscopeStatus::InvalidParameter,
        Error::Capacity { .. } | Error::OracleSizeCap(_) => SetscopeStatus::Capacity,
        Error::NumericalFailure { .. } | Error::EmptySpectra => SetscopeStatus::NumericalFailure,
        Error::BranchUnavailable { .. } | Error::NonFiniteCurve { .. } => {
            SetscopeStatus::Unavailable
        }
        Error::InsufficientSamples { .. } => SetscopeStatus::InsufficientSamples,
    }
}

fn fail(status: SetscopeStatus, msg: &str) -> SetscopeStatus {
    set_last_error(msg);
    status
}

/// Run `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SetscopeStatus>) -> SetscopeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SetscopeStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(SetscopeStatus::Panic, "internal panic"),
    }
}

fn check(err: Error) -> SetscopeStatus {
    fail(status_of(&err), &err.to_string())
}

fn sign_of(v: i32, name: &str) -> Result<Sign, SetscopeStatus> {
    Sign::from_value(i64::from(v)).map_err(|_| {
        fail(
            SetscopeStatus::InvalidParameter,
            &format!("invalid-parameter: {name}: must be +1 or -1, got {v}"),
        )
    })
}

fn branch_of(branch: i32) -> Result<Kx, SetscopeStatus> {
    match branch {
        0 => Ok(Kx::Zero),
        1 => Ok(Kx::Pi),
        other => Err(fail(
            SetscopeStatus::InvalidParameter,
            &format!("invalid-parameter: branch: 0 (k_x=0) or 1 (k_x=pi), got {other}"),
        )),
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, SetscopeStatus> {
    p.as_ref()
        .ok_or_else(|| fail(SetscopeStatus::NullPointer, "null pointer argument"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), SetscopeStatus> {
    if out.is_null() {
        return Err(fail(SetscopeStatus::NullPointer, "null output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn setscope_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}

/// Message of the last failing call on this thread; empty if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn setscope_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Create a model. `km`, `ke` are ±1, `w` in (0, 1], `detect` 0 for e, 1 for m.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn setscope_model_new(
    km: i32,
    ke: i32,
    w: f64,
    detect: i32,
    out: *mut *mut SetscopeModel,
) -> SetscopeStatus {
    guard(|| {
        let km = sign_of(km, "km")?;
        let ke = sign_of(ke, "ke")?;
        let detect = match detect {
            0 => Sector::E,
            1 => Sector::M,
            other => {
                return Err(fail(
                    SetscopeStatus::InvalidParameter,
                    &format!("invalid-parameter: detect: 0 (e) or 1 (m), got {other}"),
                ))
            }
        };
        let params = ModelParams::new(km, ke, w, detect).map_err(check)?;
        write(out, Box::into_raw(Box::new(SetscopeModel { params })))
    })
}

/// Release a model. Null is ignored.
///
/// # Safety
/// `model` must come from [`setscope_model_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn setscope_model_free(model: *mut SetscopeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Analyse the model at perimeter `ly` with explicit tolerances.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn setscope_spectrum_compute_with(
    model: *const SetscopeModel,
    ly: u32,
    degeneracy_tol: f64,
    real_tol: f64,
    zero_tol: f64,
    out: *mut *mut SetscopeSpectrum,
) -> SetscopeStatus {
    guard(|| {
        let model = deref(model)?;
        if out.is_null() {
            return Err(fail(SetscopeStatus::NullPointer, "null output pointer"));
        }
        for (name, v) in [
            ("degeneracy_tol", degeneracy_tol),
            ("real_tol", real_tol),
            ("zero_tol", zero_tol),
        ] {
            if !(v.is_finite() && v > 0.0 && v < 1.0) {
                return Err(fail(
                    SetscopeStatus::InvalidParameter,
                    &format!("invalid-parameter: {name}: must lie in (0, 1), got {v}"),
                ));
            }
        }
        let tol = Tolerances {
            degeneracy: degeneracy_tol,
            real: real_tol,
            zero: zero_tol,
        };
        let analysis = analyze(&model.params, ly as usize, &tol).map_err(check)?;
        write(out, Box::into_raw(Box::new(SetscopeSpectrum { analysis })))
    })
}

/// Analyse the model at perimeter `ly` with default tolerances.
///
/// # Safety
/// As [`setscope_spectrum_compute_with`].
#[no_mangle]
pub unsafe extern "C" fn setscope_spectrum_compute(
    model: *const SetscopeModel,
    ly: u32,
    out: *mut *mut SetscopeSpectrum,
) -> SetscopeStatus {
    let t = Tolerances::default();
    setscope_spectrum_compute_with(model, ly, t.degeneracy, t.real, t.zero, out)
}

/// Release a spectrum. Null is ignored.
///
/// # Safety
/// `spectrum` must come from a compute call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn setscope_spectrum_free(spectrum: *mut SetscopeSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Leading magnitude λ0.
///
/// # Safety
/// `spectrum` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn setscope_spectrum_lambda0(
    spectrum: *const SetscopeSpectrum,
    out: *mut f64,
) -> SetscopeStatus {
    guard(|| write(out, deref(spectrum)?.analysis.ground.lambda0))
}

/// Number of degenerate leading eigenvalues.
///
/// # Safety
/// `spectrum` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn setscope_spectrum_ground_count(
    spectrum: *const SetscopeSpectrum,
    out: *mut usize,
) -> SetscopeStatus {
    guard(|| write(out, deref(spectrum)?.analysis.ground.members.len()))
}

/// SCL minimum ε at `k_index` on `branch` (0: k_x=0, 1: k_x=π); +infinity when
/// the sector has no nonvanishing eigenvalue there.
///
/// # Safety
/// `spectrum` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn setscope_spectrum_epsilon(
    spectrum: *const SetscopeSpectrum,
    branch: i32,
    k_index: u32,
    out: *mut f64,
) -> SetscopeStatus {
    guard(|| {
        let s = deref(spectrum)?;
        let kx = branch_of(branch)?;
        let curve = &s.analysis.curve;
        if k_index as usize >= curve.ly {
            return Err(fail(
                SetscopeStatus::InvalidParameter,
                &format!(
                    "invalid-momentum: k_y index {k_index} outside 0..{}",
                    curve.ly
                ),
            ));
        }
        let values = curve.branch(kx).map_err(check)?;
        write(out, values[k_index as usize].as_f64())
    })
}

/// Gap γ at `k_index` on `branch`; +infinity when no eigenvalue qualifies.
///
/// # Safety
/// `spectrum` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn setscope_spectrum_gap(
    spectrum: *const SetscopeSpectrum,
    branch: i32,
    k_index: u32,
    out: *mut f64,
) -> SetscopeStatus {
    guard(|| {
        let s = deref(spectrum)?;
        let kx = branch_of(branch)?;
        let ly = s.analysis.curve.ly;
        let gap = s
            .analysis
            .gaps
            .iter()
            .find(|g| g.k_index == k_index as usize && g.kx == kx)
            .ok_or_else(|| {
                fail(
                    SetscopeStatus::Unavailable,
                    &format!(
                        "branch unavailable: k_x={} at L_y={ly}, k_y index {k_index}",
                        kx.label()
                    ),
                )
            })?;
        write(out, gap.gamma.as_f64())
    })
}

/// Total number of eigenvalues over all momentum sectors (`2^{L_y}`).
///
/// # Safety
/// `spectrum` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn setscope_spectrum_eigenvalue_count(
    spectrum: *const SetscopeSpectrum,
    out: *mut usize,
) -> SetscopeStatus {
    guard(|| {
        write(
            out,
            deref(spectrum)?.analysis.spectra.all_eigenvalues().count(),
        )
    })
}

/// Copy all eigenvalues, sector by sector, into `re` / `im` of length `len`.
///
/// # Safety
/// `re` and `im` must each be valid for writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn setscope_spectrum_eigenvalues(
    spectrum: *const SetscopeSpectrum,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> SetscopeStatus {
    guard(|| {
        let s = deref(spectrum)?;
        if re.is_null() || im.is_null() {
            return Err(fail(SetscopeStatus::NullPointer, "null output buffer"));
        }
        let n = s.analysis.spectra.all_eigenvalues().count();
        if len < n {
            return Err(fail(
                SetscopeStatus::BufferTooSmall,
                &format!("buffer holds {len} values, {n} needed"),
            ));
        }
        for (i, z) in s.analysis.spectra.all_eigenvalues().enumerate() {
            ptr::write(re.add(i), z.re);
            ptr::write(im.add(i), z.im);
        }
        Ok(())
    })
}

/// Verdict for the model's detected sector from curves at the `n` perimeters in `lys`.
///
/// # Safety
/// `model` must be a live handle, `lys` valid for reading `n` values and `out` for writing.
#[no_mangle]
pub unsafe extern "C" fn setscope_classify(
    model: *const SetscopeModel,
    lys: *const u32,
    n: usize,
    period_threshold: f64,
    min_fit_quality: f64,
    out: *mut SetscopeVerdict,
) -> SetscopeStatus {
    guard(|| {
        let model = deref(model)?;
        if lys.is_null() && n > 0 {
            return Err(fail(SetscopeStatus::NullPointer, "null perimeter list"));
        }
        if out.is_null() {
            return Err(fail(SetscopeStatus::NullPointer, "null output pointer"));
        }
        let lys: Vec<usize> = if n == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(lys, n)
                .iter()
                .map(|&l| l as usize)
                .collect()
        };
        let cfg = ClassifierConfig {
            period_threshold,
            min_fit_quality,
        };
        let sector = model.params.detect();
        let run = run_sector(&model.params, sector, &lys, &Tolerances::default());
        if let Err(e) = &run {
            if matches!(
                e,
                Error::InsufficientSamples { .. }
                    | Error::UndefinedForOdd(_)
                    | Error::InvalidParameter { .. }
                    | Error::Capacity { .. }
                    | Error::NumericalFailure { .. }
            ) {
                return Err(check(e.clone()));
            }
        }
        let c = match sector {
            Sector::E => classify_eta(Some(&run), None, &cfg).eta_e,
            Sector::M => classify_eta(None, Some(&run), &cfg).eta_m,
        };
        let verdict = match c.expect("sector was run") {
            Verdict::Plus => SetscopeVerdict::Plus,
            Verdict::Minus => SetscopeVerdict::Minus,
            Verdict::Undetermined => SetscopeVerdict::Undetermined,
        };
        write(out, verdict)
    })
}
