//! C ABI for the expertkm estimators.
//!
//! Samples and curves are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible function returns an
//! [`EkmStatus`]; on failure a description is available from
//! [`ekm_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use expertkm::expert::{self, ExpertSample, MixtureCurve};
use expertkm::semiparametric::{self, ParametricModel};
use expertkm::{BeliefKernel, Error, ExpertMode, KernelKind, KmCurve, Observation, StepCurve};

/// Result codes shared by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EkmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    MissingExpertInfo = 3,
    DegenerateWeight = 4,
    DegenerateFit = 5,
    Numeric = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EkmEstimator {
    /// Usual Kaplan–Meier estimator on the closed/open indicators.
    Km = 0,
    /// Crude expert estimator on the judgments.
    Crude = 1,
    /// Kernel-mixture estimator on the belief kernels.
    Sophisticated = 2,
    /// Benchmark using the hidden event times.
    Oracle = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EkmKernelKind {
    /// No kernel (open claims).
    None = 0,
    Dirac = 1,
    TruncatedGaussian = 2,
    TruncatedGamma = 3,
    Uniform = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EkmModel {
    Exponential = 0,
    /// `param` is the known scale.
    Pareto = 1,
    /// `param` is the number of upper order statistics.
    Hill = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EkmMode {
    Crude = 0,
    Sophisticated = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EkmFit {
    pub estimate: f64,
    pub weight_mass: f64,
    pub residual: f64,
    /// 0 for a closed form, 1 for the numeric maximiser.
    pub numeric: i32,
}

/// Opaque sample handle.
pub struct EkmSample {
    observations: Vec<Observation>,
    inner: ExpertSample,
}

/// Opaque curve handle.
pub struct EkmCurve {
    inner: Curve,
}

enum Curve {
    Km(KmCurve),
    Step(StepCurve),
    Mixture(MixtureCurve),
}

impl Curve {
    fn evaluate(&self, t: f64) -> f64 {
        match self {
            Curve::Km(c) => c.evaluate(t),
            Curve::Step(c) => c.evaluate(t),
            Curve::Mixture(c) => c.evaluate(t),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(e: &Error) -> EkmStatus {
    match e {
        Error::Validation(_) | Error::InvalidObservation { .. } | Error::Csv(_) | Error::Json(_) | Error::Io(_) => {
            EkmStatus::InvalidInput
        }
        Error::Configuration(_) => EkmStatus::MissingExpertInfo,
        Error::DegenerateWeight { .. } => EkmStatus::DegenerateWeight,
        Error::DegenerateFit(_) => EkmStatus::DegenerateFit,
        Error::Numeric(_) => EkmStatus::Numeric,
    }
}

struct Failure(EkmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EkmStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> EkmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            EkmStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            EkmStatus::Panic
        }
    }
}

/// Reads `n` values, accepting a null pointer only for `n == 0`.
unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: the caller guarantees `p` points to `n` readable values.
    Ok(unsafe { std::slice::from_raw_parts(p, n) })
}

unsafe fn optional_slice<'a, T>(p: *const T, n: usize) -> Option<&'a [T]> {
    // SAFETY: as for `slice`; null means "absent".
    (!p.is_null()).then(|| unsafe { std::slice::from_raw_parts(p, n) })
}

/// Builds a sample from `n` observations. `delta[i]` is nonzero for a
/// closed claim. `eta` (judgments) and `x_true` (hidden event times) may be
/// null.
///
/// # Safety
/// `w` and `delta` must point to `n` values; `eta` and `x_true` must be
/// null or point to `n` values; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ekm_sample_new(
    w: *const f64,
    delta: *const u8,
    eta: *const f64,
    x_true: *const f64,
    n: usize,
    out: *mut *mut EkmSample,
) -> EkmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let w = unsafe { slice(w, n, "w")? };
        let delta = unsafe { slice(delta, n, "delta")? };
        let eta = unsafe { optional_slice(eta, n) };
        let x_true = unsafe { optional_slice(x_true, n) };
        let observations: Vec<Observation> = (0..n)
            .map(|i| {
                let mut o = Observation::new(w[i], delta[i] != 0);
                o.eta = eta.map(|e| e[i]);
                o.x_true = x_true.map(|x| x[i]);
                o
            })
            .collect();
        let inner = ExpertSample::new(&observations)?;
        // SAFETY: `out` checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(EkmSample { observations, inner })) };
        Ok(())
    })
}

/// Attaches belief kernels, one per observation in input order. Each
/// kernel lives on `[w_i, ∞)`; `p1`/`p2` follow the kernel CSV convention
/// (Dirac atom; Gaussian location/scale; Gamma shape/rate; uniform upper
/// end). Open claims take [`EkmKernelKind::None`].
///
/// # Safety
/// `sample` must be a live handle; the arrays must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn ekm_sample_set_kernels(
    sample: *mut EkmSample,
    kinds: *const EkmKernelKind,
    p1: *const f64,
    p2: *const f64,
    n: usize,
) -> EkmStatus {
    guard(|| {
        // SAFETY: the caller guarantees a live handle.
        let s = unsafe { sample.as_mut() }.ok_or_else(|| null("sample"))?;
        if n != s.observations.len() {
            return Err(Failure(
                EkmStatus::InvalidInput,
                format!("expected {} kernels, got {n}", s.observations.len()),
            ));
        }
        let kinds = unsafe { slice(kinds, n, "kinds")? };
        let p1 = unsafe { slice(p1, n, "p1")? };
        let p2 = unsafe { slice(p2, n, "p2")? };
        let kernels = (0..n)
            .map(|i| {
                let lower = s.observations[i].w;
                let kind = match kinds[i] {
                    EkmKernelKind::None => return Ok(None),
                    EkmKernelKind::Dirac => KernelKind::Dirac,
                    EkmKernelKind::TruncatedGaussian => KernelKind::TruncatedGaussian,
                    EkmKernelKind::TruncatedGamma => KernelKind::TruncatedGamma,
                    EkmKernelKind::Uniform => KernelKind::Uniform,
                };
                BeliefKernel::from_params(kind, lower, p1[i], Some(p2[i])).map(Some)
            })
            .collect::<Result<Vec<_>, _>>()?;
        s.inner = ExpertSample::with_beliefs(&s.observations, kernels)?;
        Ok(())
    })
}

/// # Safety
/// `sample` must be null or a handle from [`ekm_sample_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ekm_sample_free(sample: *mut EkmSample) {
    if !sample.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(sample) });
    }
}

/// Number of observations in a sample; 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ekm_sample_len(sample: *const EkmSample) -> usize {
    // SAFETY: the caller guarantees a live handle or null.
    unsafe { sample.as_ref() }.map_or(0, |s| s.observations.len())
}

/// Computes an estimator of the event-time distribution function.
///
/// # Safety
/// `sample` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ekm_estimate(
    sample: *const EkmSample,
    estimator: EkmEstimator,
    out: *mut *mut EkmCurve,
) -> EkmStatus {
    guard(|| {
        // SAFETY: the caller guarantees a live handle.
        let s = unsafe { sample.as_ref() }.ok_or_else(|| null("sample"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = match estimator {
            EkmEstimator::Km => Curve::Km(expert::usual_km(&s.inner)?),
            EkmEstimator::Crude => Curve::Km(expert::crude_km(&s.inner)?),
            EkmEstimator::Sophisticated => Curve::Mixture(expert::sophisticated_km(&s.inner)?),
            EkmEstimator::Oracle => Curve::Step(expert::oracle_km(&s.inner)?),
        };
        // SAFETY: `out` checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(EkmCurve { inner })) };
        Ok(())
    })
}

/// Evaluates a curve at `m` points.
///
/// # Safety
/// `curve` must be a live handle; `t` and `values` must hold `m` values.
#[no_mangle]
pub unsafe extern "C" fn ekm_curve_eval(curve: *const EkmCurve, t: *const f64, m: usize, values: *mut f64) -> EkmStatus {
    guard(|| {
        // SAFETY: the caller guarantees a live handle.
        let c = unsafe { curve.as_ref() }.ok_or_else(|| null("curve"))?;
        let t = unsafe { slice(t, m, "t")? };
        if m > 0 && values.is_null() {
            return Err(null("values"));
        }
        for (j, &tj) in t.iter().enumerate() {
            // SAFETY: `values` holds `m` writable slots.
            unsafe { *values.add(j) = c.inner.evaluate(tj) };
        }
        Ok(())
    })
}

/// # Safety
/// `curve` must be null or a handle from [`ekm_estimate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ekm_curve_free(curve: *mut EkmCurve) {
    if !curve.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(curve) });
    }
}

/// Fits a parametric model by weighted likelihood. `param` is the Pareto
/// scale or the Hill `k` and is ignored for the Exponential model. A
/// nonzero `numeric` selects the numeric maximiser.
///
/// # Safety
/// `sample` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ekm_fit(
    sample: *const EkmSample,
    model: EkmModel,
    param: f64,
    mode: EkmMode,
    numeric: i32,
    out: *mut EkmFit,
) -> EkmStatus {
    guard(|| {
        // SAFETY: the caller guarantees a live handle.
        let s = unsafe { sample.as_ref() }.ok_or_else(|| null("sample"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mode = match mode {
            EkmMode::Crude => ExpertMode::Crude,
            EkmMode::Sophisticated => ExpertMode::Sophisticated,
        };
        let hill_k = || -> Result<usize, Failure> {
            if param >= 1.0 && param.fract() == 0.0 && param < usize::MAX as f64 {
                Ok(param as usize)
            } else {
                Err(Failure(EkmStatus::InvalidInput, format!("Hill k must be a positive integer, got {param}")))
            }
        };
        let sample = &s.inner;
        let r = match (model, numeric != 0) {
            (EkmModel::Exponential, false) => match mode {
                ExpertMode::Crude => semiparametric::fit_exponential_crude(sample)?,
                ExpertMode::Sophisticated => semiparametric::fit_exponential_sophisticated(sample)?,
            },
            (EkmModel::Exponential, true) => semiparametric::fit_numeric(sample, ParametricModel::Exponential, mode)?,
            (EkmModel::Pareto, false) => semiparametric::fit_pareto(sample, param, mode)?,
            (EkmModel::Pareto, true) => semiparametric::fit_numeric(sample, ParametricModel::pareto(param)?, mode)?,
            (EkmModel::Hill, false) => semiparametric::fit_hill(sample, hill_k()?, mode)?,
            (EkmModel::Hill, true) => semiparametric::fit_numeric_hill(sample, hill_k()?, mode)?,
        };
        // SAFETY: `out` checked non-null above.
        unsafe {
            *out = EkmFit {
                estimate: r.estimate,
                weight_mass: r.weight_mass,
                residual: r.residual,
                numeric: (numeric != 0) as i32,
            }
        };
        Ok(())
    })
}

/// Upper incomplete gamma function `∫_x^∞ t^{s-1} e^{-t} dt`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ekm_upper_incomplete_gamma(s: f64, x: f64, out: *mut f64) -> EkmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = expertkm::special::upper_incomplete_gamma(s, x)?;
        // SAFETY: `out` checked non-null above.
        unsafe { *out = v };
        Ok(())
    })
}

/// Message for the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn ekm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ekm_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}
