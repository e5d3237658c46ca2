//! C interface over the factorization library.
//!
//! Every object crossing the boundary is an opaque handle created and
//! destroyed by paired functions; callers never see the layout. Fallible
//! calls either return a status code or a null handle, and the failure text
//! is kept in a thread-local buffer readable through
//! [`mfac_last_error_message`]. Panics are caught at the boundary and
//! reported as [`MfacStatus::Panic`] instead of unwinding into foreign
//! frames.
//!
//! The header shipped in `include/mfac.h` is generated from this file by the
//! build script.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use libc::{c_char, c_int};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mfac::dataset::{load_samples, save_samples, whiten, Format, SampleMatrix};
use mfac::error::Error;
use mfac::factor::{factor_under_gaussian, FactorConfig, GaussianFactorization};
use mfac::learner::{learn_under_gaussian, InnerLearner, LearnConfig, SubspaceClassifier};

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfacStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Arguments or data were rejected before any numerical work.
    InvalidInput = 2,
    /// Dimensions of the arguments do not agree.
    DimensionMismatch = 3,
    /// The computation ran but could not produce a usable answer.
    Numerical = 4,
    /// Reading or writing a file failed.
    Io = 5,
    /// A size guard refused the problem instance.
    Guard = 6,
    /// An internal invariant broke; the library state is still valid.
    Panic = 7,
}

/// Samples held as a dense matrix, one row per observation, with optional
/// binary labels.
pub struct MfacSamples {
    inner: SampleMatrix,
}

/// Recovered orthogonal split of the sample coordinates.
pub struct MfacFactorization {
    inner: GaussianFactorization,
    ambient: usize,
}

/// A learned concept bound to its recovered subspace.
pub struct MfacClassifier {
    inner: SubspaceClassifier,
    holdout_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Display) {
    let text = msg.to_string();
    let owned = CString::new(text).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = owned);
}

fn status_of(e: &Error) -> MfacStatus {
    match e {
        Error::Io { .. } => MfacStatus::Io,
        Error::Parse { .. }
        | Error::Data(_)
        | Error::NoSamples
        | Error::Config(_)
        | Error::InsufficientPositives { .. }
        | Error::Evaluator { .. }
        | Error::Other(_) => MfacStatus::InvalidInput,
        Error::DimensionMismatch { .. } => MfacStatus::DimensionMismatch,
        Error::DegenerateCovariance { .. }
        | Error::InsufficientStart { .. }
        | Error::NonConvergence { .. } => MfacStatus::Numerical,
        Error::Guard { .. } => MfacStatus::Guard,
    }
}

fn report(e: &Error) -> MfacStatus {
    set_error(e);
    status_of(e)
}

/// Runs `f` with panics converted to an error report and `fallback`.
fn contained<T>(fallback: T, f: impl FnOnce() -> T) -> T {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("internal panic: {msg}"));
            fallback
        }
    }
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, MfacStatus> {
    if path.is_null() {
        set_error("path is null");
        return Err(MfacStatus::NullArgument);
    }
    match CStr::from_ptr(path).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid utf-8");
            Err(MfacStatus::InvalidInput)
        }
    }
}

/// Library version as a static string; never freed by the caller.
#[no_mangle]
pub extern "C" fn mfac_version() -> *const c_char {
    static VERSION: &[u8] = b"0.1.0\0";
    VERSION.as_ptr() as *const c_char
}

/// Text of the most recent failure on this thread.
///
/// The pointer stays valid until the next library call on the same thread;
/// copy the string before calling anything else. Returns an empty string
/// when no failure has been recorded.
#[no_mangle]
pub extern "C" fn mfac_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a sample set from a dense row-major array.
///
/// `data` holds `rows * cols` values, one observation per row. `labels` is
/// either null or `rows` bytes of 0/1 class labels. The data is copied, so
/// the caller's buffers can be released immediately. Returns null on
/// failure.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles and `labels`, when
/// non-null, to `rows` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn mfac_samples_create(
    data: *const f64,
    rows: usize,
    cols: usize,
    labels: *const u8,
) -> *mut MfacSamples {
    if data.is_null() {
        set_error("data is null");
        return std::ptr::null_mut();
    }
    let Some(len) = rows.checked_mul(cols) else {
        set_error("rows * cols overflows");
        return std::ptr::null_mut();
    };
    contained(std::ptr::null_mut(), || {
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let matrix = match ndarray::Array2::from_shape_vec((rows, cols), values) {
            Ok(m) => m,
            Err(e) => {
                set_error(e);
                return std::ptr::null_mut();
            }
        };
        let lab = if labels.is_null() {
            None
        } else {
            Some(std::slice::from_raw_parts(labels, rows).to_vec())
        };
        match SampleMatrix::new(matrix, lab) {
            Ok(s) => Box::into_raw(Box::new(MfacSamples { inner: s })),
            Err(e) => {
                report(&e);
                std::ptr::null_mut()
            }
        }
    })
}

/// Loads samples from a file, choosing CSV or the binary format by
/// extension. Returns null on failure.
///
/// # Safety
/// `path` must be a valid nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mfac_samples_load(path: *const c_char) -> *mut MfacSamples {
    let p = match path_arg(path) {
        Ok(p) => p,
        Err(_) => return std::ptr::null_mut(),
    };
    contained(std::ptr::null_mut(), || {
        match load_samples(p, Format::from_path(p)) {
            Ok(s) => Box::into_raw(Box::new(MfacSamples { inner: s })),
            Err(e) => {
                report(&e);
                std::ptr::null_mut()
            }
        }
    })
}

/// Writes samples to a file, choosing CSV or the binary format by
/// extension.
///
/// # Safety
/// `handle` must be a live samples handle and `path` a valid nul-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn mfac_samples_save(
    handle: *const MfacSamples,
    path: *const c_char,
) -> MfacStatus {
    let Some(s) = handle.as_ref() else {
        set_error("samples handle is null");
        return MfacStatus::NullArgument;
    };
    let p = match path_arg(path) {
        Ok(p) => p,
        Err(code) => return code,
    };
    contained(MfacStatus::Panic, || {
        match save_samples(p, &s.inner, Format::from_path(p)) {
            Ok(()) => MfacStatus::Ok,
            Err(e) => report(&e),
        }
    })
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live samples handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_samples_rows(handle: *const MfacSamples) -> usize {
    handle.as_ref().map_or(0, |s| s.inner.len())
}

/// Coordinate dimension, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live samples handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_samples_cols(handle: *const MfacSamples) -> usize {
    handle.as_ref().map_or(0, |s| s.inner.dim())
}

/// Releases a samples handle. Null is ignored.
///
/// # Safety
/// `handle` must be null or a samples handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfac_samples_free(handle: *mut MfacSamples) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Splits the coordinates of `samples` into a non-gaussian subspace and a
/// gaussian complement.
///
/// `m_max` caps the moment order used in the search and `restarts` the
/// number of fresh attempts; pass 0 for either to keep the defaults. When
/// `whiten` is set the samples are whitened first and the recovered basis
/// refers to whitened coordinates. `seed` fixes the randomness. Returns
/// null on failure.
///
/// # Safety
/// `samples` must be a live samples handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_factor_gaussian(
    samples: *const MfacSamples,
    m_max: u32,
    restarts: u32,
    whiten_first: bool,
    seed: u64,
) -> *mut MfacFactorization {
    let Some(s) = samples.as_ref() else {
        set_error("samples handle is null");
        return std::ptr::null_mut();
    };
    contained(std::ptr::null_mut(), || {
        let mut cfg = FactorConfig::default();
        if m_max > 0 {
            cfg.basis.m_max = m_max;
        }
        if restarts > 0 {
            cfg.restarts = restarts as usize;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let run = |s: &SampleMatrix, rng: &mut ChaCha8Rng| factor_under_gaussian(s, &cfg, rng);
        let outcome = if whiten_first {
            whiten(&s.inner).and_then(|(ws, _t)| run(&ws, &mut rng))
        } else {
            run(&s.inner, &mut rng)
        };
        match outcome {
            Ok(f) => {
                let ambient = s.inner.dim();
                Box::into_raw(Box::new(MfacFactorization { inner: f, ambient }))
            }
            Err(e) => {
                report(&e);
                std::ptr::null_mut()
            }
        }
    })
}

/// Dimension of the recovered non-gaussian subspace, or 0 for null.
///
/// # Safety
/// `handle` must be null or a live factorization handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_factorization_subspace_dim(
    handle: *const MfacFactorization,
) -> usize {
    handle.as_ref().map_or(0, |f| f.inner.v.len())
}

/// Dimension of the coordinate space the split lives in, or 0 for null.
///
/// # Safety
/// `handle` must be null or a live factorization handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_factorization_ambient_dim(
    handle: *const MfacFactorization,
) -> usize {
    handle.as_ref().map_or(0, |f| f.ambient)
}

/// Whether the split passed its own independence and complement checks.
///
/// # Safety
/// `handle` must be null or a live factorization handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_factorization_verified(
    handle: *const MfacFactorization,
) -> bool {
    handle.as_ref().is_some_and(|f| f.inner.verified)
}

/// Recovery attempts consumed, or 0 for null.
///
/// # Safety
/// `handle` must be null or a live factorization handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_factorization_attempts(
    handle: *const MfacFactorization,
) -> usize {
    handle.as_ref().map_or(0, |f| f.inner.attempts)
}

/// Copies the recovered orthonormal basis into `out`.
///
/// The basis is written row-major as `subspace_dim` rows of `ambient_dim`
/// values, one direction per row. `capacity` is the number of doubles `out`
/// can hold and must be at least `subspace_dim * ambient_dim`.
///
/// # Safety
/// `handle` must be a live factorization handle and `out` must point to
/// `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mfac_factorization_basis(
    handle: *const MfacFactorization,
    out: *mut f64,
    capacity: usize,
) -> MfacStatus {
    let Some(f) = handle.as_ref() else {
        set_error("factorization handle is null");
        return MfacStatus::NullArgument;
    };
    if out.is_null() {
        set_error("output buffer is null");
        return MfacStatus::NullArgument;
    }
    let k = f.inner.v.len();
    let n = f.ambient;
    let needed = k * n;
    if capacity < needed {
        set_error(format!("buffer holds {capacity} doubles, need {needed}"));
        return MfacStatus::DimensionMismatch;
    }
    let dst = std::slice::from_raw_parts_mut(out, needed);
    for i in 0..k {
        let v = f.inner.v.vector(i);
        dst[i * n..(i + 1) * n].copy_from_slice(v.as_slice().unwrap());
    }
    MfacStatus::Ok
}

/// Releases a factorization handle. Null is ignored.
///
/// # Safety
/// `handle` must be null or a factorization handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfac_factorization_free(handle: *mut MfacFactorization) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Learns a concept living on a `k`-dimensional subspace from labeled
/// samples whose remaining directions are gaussian.
///
/// The samples must carry labels. `m_max` of 0 keeps the default moment
/// cap. `use_hull` selects a convex-hull hypothesis instead of an
/// axis-aligned box in the recovered coordinates; the box needs the concept
/// frame to align with the recovered directions, the hull does not. `seed`
/// fixes the randomness. Returns null on failure.
///
/// # Safety
/// `samples` must be a live samples handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_learn(
    samples: *const MfacSamples,
    k: usize,
    m_max: u32,
    use_hull: bool,
    seed: u64,
) -> *mut MfacClassifier {
    let Some(s) = samples.as_ref() else {
        set_error("samples handle is null");
        return std::ptr::null_mut();
    };
    contained(std::ptr::null_mut(), || {
        let mut cfg = LearnConfig::default();
        cfg.k = k;
        if m_max > 0 {
            cfg.basis.m_max = m_max;
        }
        if use_hull {
            cfg.inner = InnerLearner::Hull;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match learn_under_gaussian(&s.inner, &cfg, &mut rng) {
            Ok(out) => Box::into_raw(Box::new(MfacClassifier {
                inner: out.classifier,
                holdout_error: out.holdout.error_rate,
            })),
            Err(e) => {
                report(&e);
                std::ptr::null_mut()
            }
        }
    })
}

/// Holdout error rate estimated during learning, or NaN for null.
///
/// # Safety
/// `handle` must be null or a live classifier handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_classifier_holdout_error(
    handle: *const MfacClassifier,
) -> f64 {
    handle.as_ref().map_or(f64::NAN, |c| c.holdout_error)
}

/// Dimension of raw points the classifier accepts, or 0 for null.
///
/// # Safety
/// `handle` must be null or a live classifier handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_classifier_input_dim(handle: *const MfacClassifier) -> usize {
    handle.as_ref().map_or(0, |c| match &c.inner.transform {
        Some(t) => t.mean.len(),
        None => c.inner.basis.dim(),
    })
}

/// Labels one raw point: 1 inside the concept, 0 outside, -1 on failure.
///
/// `dim` must match [`mfac_classifier_input_dim`].
///
/// # Safety
/// `handle` must be a live classifier handle and `point` must hold `dim`
/// readable doubles.
#[no_mangle]
pub unsafe extern "C" fn mfac_classifier_predict(
    handle: *const MfacClassifier,
    point: *const f64,
    dim: usize,
) -> c_int {
    let Some(c) = handle.as_ref() else {
        set_error("classifier handle is null");
        return -1;
    };
    if point.is_null() {
        set_error("point is null");
        return -1;
    }
    contained(-1, || {
        let values = std::slice::from_raw_parts(point, dim).to_vec();
        let matrix = match ndarray::Array2::from_shape_vec((1, dim), values) {
            Ok(m) => m,
            Err(e) => {
                set_error(e);
                return -1;
            }
        };
        let s = match SampleMatrix::new(matrix, None) {
            Ok(s) => s,
            Err(e) => {
                report(&e);
                return -1;
            }
        };
        match c.inner.predict_matrix(&s) {
            Ok(labels) => c_int::from(labels[0]),
            Err(e) => {
                report(&e);
                -1
            }
        }
    })
}

/// Serializes a classifier to a JSON string owned by the library; release
/// it with [`mfac_string_free`]. Returns null on failure.
///
/// # Safety
/// `handle` must be a live classifier handle.
#[no_mangle]
pub unsafe extern "C" fn mfac_classifier_to_json(
    handle: *const MfacClassifier,
) -> *mut c_char {
    let Some(c) = handle.as_ref() else {
        set_error("classifier handle is null");
        return std::ptr::null_mut();
    };
    contained(std::ptr::null_mut(), || {
        match serde_json::to_string(&c.inner) {
            Ok(json) => match CString::new(json) {
                Ok(cs) => cs.into_raw(),
                Err(e) => {
                    set_error(e);
                    std::ptr::null_mut()
                }
            },
            Err(e) => {
                set_error(e);
                std::ptr::null_mut()
            }
        }
    })
}

/// Rebuilds a classifier from its JSON form. The holdout error of a
/// restored classifier reads as NaN. Returns null on failure.
///
/// # Safety
/// `json` must be a valid nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mfac_classifier_from_json(json: *const c_char) -> *mut MfacClassifier {
    if json.is_null() {
        set_error("json is null");
        return std::ptr::null_mut();
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("json is not valid utf-8");
            return std::ptr::null_mut();
        }
    };
    contained(std::ptr::null_mut(), || {
        match serde_json::from_str::<SubspaceClassifier>(text) {
            Ok(inner) => Box::into_raw(Box::new(MfacClassifier {
                inner,
                holdout_error: f64::NAN,
            })),
            Err(e) => {
                set_error(e);
                std::ptr::null_mut()
            }
        }
    })
}

/// Releases a classifier handle. Null is ignored.
///
/// # Safety
/// `handle` must be null or a classifier handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfac_classifier_free(handle: *mut MfacClassifier) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by a library call, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mfac::dataset::{gen_factorizable, gen_labeled, ComponentDist, ComponentSpec, Concept};
    use std::ffi::CString;

    fn read_error() -> String {
        unsafe {
            CStr::from_ptr(mfac_last_error_message())
                .to_string_lossy()
                .into_owned()
        }
    }

    #[test]
    fn samples_round_trip_through_raw_parts() {
        let data = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let labels = vec![1u8, 0, 1];
        unsafe {
            let h = mfac_samples_create(data.as_ptr(), 3, 2, labels.as_ptr());
            assert!(!h.is_null());
            assert_eq!(mfac_samples_rows(h), 3);
            assert_eq!(mfac_samples_cols(h), 2);
            mfac_samples_free(h);
        }
    }

    #[test]
    fn null_and_invalid_inputs_set_the_error_text() {
        unsafe {
            assert!(mfac_samples_create(std::ptr::null(), 2, 2, std::ptr::null()).is_null());
            assert_eq!(read_error(), "data is null");

            let bad = vec![1.0, f64::NAN, 3.0, 4.0];
            assert!(mfac_samples_create(bad.as_ptr(), 2, 2, std::ptr::null()).is_null());
            assert!(read_error().contains("row 0"));

            assert_eq!(mfac_samples_rows(std::ptr::null()), 0);
            assert_eq!(mfac_samples_cols(std::ptr::null()), 0);
            assert!(!mfac_factorization_verified(std::ptr::null()));
            assert!(mfac_classifier_holdout_error(std::ptr::null()).is_nan());
            mfac_samples_free(std::ptr::null_mut());
            mfac_factorization_free(std::ptr::null_mut());
            mfac_classifier_free(std::ptr::null_mut());
            mfac_string_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn save_and_load_preserve_shape() {
        let dir = std::env::temp_dir().join("mfac_ffi_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("round.bin");
        let cpath = CString::new(path.to_str().unwrap()).unwrap();
        let data: Vec<f64> = (0..20).map(|i| i as f64 / 7.0).collect();
        unsafe {
            let h = mfac_samples_create(data.as_ptr(), 5, 4, std::ptr::null());
            assert_eq!(mfac_samples_save(h, cpath.as_ptr()), MfacStatus::Ok);
            let back = mfac_samples_load(cpath.as_ptr());
            assert!(!back.is_null());
            assert_eq!(mfac_samples_rows(back), 5);
            assert_eq!(mfac_samples_cols(back), 4);
            mfac_samples_free(h);
            mfac_samples_free(back);

            let missing = CString::new(dir.join("absent.bin").to_str().unwrap()).unwrap();
            assert!(mfac_samples_load(missing.as_ptr()).is_null());
            assert!(read_error().contains("io error"));
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn factorization_recovers_a_box_direction() {
        let spec = ComponentSpec {
            v: ComponentDist::isotropic_box(1),
            w: ComponentDist::Gaussian,
        };
        let (s, truth) = gen_factorizable(&spec, 4, 1, 30_000, 11).unwrap();
        let flat: Vec<f64> = s.data().iter().cloned().collect();
        unsafe {
            let h = mfac_samples_create(flat.as_ptr(), s.len(), s.dim(), std::ptr::null());
            assert!(!h.is_null());
            let f = mfac_factor_gaussian(h, 4, 4, true, 77);
            assert!(!f.is_null(), "factorization failed: {}", read_error());
            let k = mfac_factorization_subspace_dim(f);
            let n = mfac_factorization_ambient_dim(f);
            assert_eq!(k, 1);
            assert_eq!(n, 4);

            let mut small = vec![0.0; 2];
            assert_eq!(
                mfac_factorization_basis(f, small.as_mut_ptr(), small.len()),
                MfacStatus::DimensionMismatch
            );

            let mut basis = vec![0.0; k * n];
            assert_eq!(
                mfac_factorization_basis(f, basis.as_mut_ptr(), basis.len()),
                MfacStatus::Ok
            );
            let v0 = truth.v_basis.vector(0);
            let dot: f64 = basis.iter().zip(v0.iter()).map(|(a, b)| a * b).sum();
            assert!(
                dot.abs() > 0.95,
                "recovered direction misaligned: |dot| = {}",
                dot.abs()
            );
            mfac_factorization_free(f);
            mfac_samples_free(h);
        }
    }

    #[test]
    fn learning_and_json_round_trip_agree() {
        let spec = ComponentSpec {
            v: ComponentDist::isotropic_box(1),
            w: ComponentDist::Gaussian,
        };
        let concept = Concept::Box {
            intervals: vec![(-0.8, 0.8)],
        };
        let (s, _truth) = gen_labeled(&spec, 3, 1, &concept, 30_000, 21).unwrap();
        let flat: Vec<f64> = s.data().iter().cloned().collect();
        let labels = s.labels().unwrap().to_vec();
        unsafe {
            let h = mfac_samples_create(flat.as_ptr(), s.len(), s.dim(), labels.as_ptr());
            assert!(!h.is_null());
            let c = mfac_learn(h, 1, 4, false, 5);
            assert!(!c.is_null(), "learning failed: {}", read_error());
            let err = mfac_classifier_holdout_error(c);
            assert!(err < 0.1, "holdout error {err}");
            let dim = mfac_classifier_input_dim(c);
            assert_eq!(dim, 3);

            let json = mfac_classifier_to_json(c);
            assert!(!json.is_null());
            let restored = mfac_classifier_from_json(json);
            assert!(!restored.is_null());
            assert!(mfac_classifier_holdout_error(restored).is_nan());

            let mut agree = 0;
            for i in 0..50 {
                let row: Vec<f64> = s.data().row(i).iter().cloned().collect();
                let a = mfac_classifier_predict(c, row.as_ptr(), dim);
                let b = mfac_classifier_predict(restored, row.as_ptr(), dim);
                assert!(a >= 0 && b >= 0);
                if a == b {
                    agree += 1;
                }
            }
            assert_eq!(agree, 50);

            assert_eq!(mfac_classifier_predict(c, flat.as_ptr(), 2), -1);
            assert!(read_error().contains("mismatch"));

            mfac_string_free(json);
            mfac_classifier_free(restored);
            mfac_classifier_free(c);
            mfac_samples_free(h);
        }
    }

    #[test]
    fn learning_without_labels_reports_invalid_input() {
        let data: Vec<f64> = (0..300).map(|i| (i as f64 * 0.37).sin()).collect();
        unsafe {
            let h = mfac_samples_create(data.as_ptr(), 100, 3, std::ptr::null());
            assert!(!h.is_null());
            let c = mfac_learn(h, 1, 4, false, 1);
            assert!(c.is_null());
            assert!(!read_error().is_empty());
            mfac_samples_free(h);
        }
    }
}
