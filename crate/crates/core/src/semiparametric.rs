//! Kullback–Leibler projections of the expert estimators onto parametric
//! families. Minimising `KL(F̂ || F_θ)` amounts to maximising the weighted
//! log-likelihood `Σ c_i ∫ ln f_θ dK_i` with IPCW weights `c_i`, which has
//! closed-form solutions for the Exponential and known-scale Pareto
//! families and for Hill-type tail indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expert::ExpertSample;
use crate::kernel::{expected_log_density, BeliefKernel, KernelKind};
use crate::product_limit::{ipcw_weights, km_censor, km_censor_weighted};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ParametricModel {
    /// `f_λ(t) = λ e^{-λ t}`.
    Exponential,
    /// `f_α(t) = (α/σ) (t/σ)^{-α-1}` for `t > σ`, with `σ` known.
    Pareto { sigma: f64 },
}

impl ParametricModel {
    pub fn pareto(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Validation(format!("Pareto scale must be positive, got {sigma}")));
        }
        Ok(ParametricModel::Pareto { sigma })
    }

    pub fn log_density(&self, theta: f64, t: f64) -> f64 {
        match *self {
            ParametricModel::Exponential => theta.ln() - theta * t,
            ParametricModel::Pareto { sigma } => theta.ln() - sigma.ln() - (theta + 1.0) * (t / sigma).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpertMode {
    Crude,
    Sophisticated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Fitted rate `λ` or tail index `α`.
    pub estimate: f64,
    /// Sum of the IPCW weights entering the fit (the numerator).
    pub weight_mass: f64,
    pub method: FitMethod,
    /// Normalised gradient at the optimum; zero for closed forms.
    pub residual: f64,
}

/// Crude IPCW weights `η_i / (1 - L'(W_i-; (W, 1 - η)))`, sorted order.
pub fn crude_weights(sample: &ExpertSample) -> Result<Vec<f64>> {
    let eta = sample.judgments()?;
    let censor = km_censor_weighted(sample.base(), &eta)?;
    ipcw_weights(sample.base(), &eta, &censor)
}

/// Sophisticated IPCW weights `δ_i / (1 - G(W_i-))`, sorted order.
pub fn sophisticated_weights(sample: &ExpertSample) -> Result<Vec<f64>> {
    let base = sample.base();
    let censor = km_censor(base)?;
    ipcw_weights(base, &base.deltas(), &censor)
}

fn weights_for(sample: &ExpertSample, mode: ExpertMode) -> Result<Vec<f64>> {
    match mode {
        ExpertMode::Crude => crude_weights(sample),
        ExpertMode::Sophisticated => sophisticated_weights(sample),
    }
}

fn closed_form(numerator: f64, denominator: f64, what: &str) -> Result<FitResult> {
    if !(numerator > 0.0) {
        return Err(Error::DegenerateFit(format!("{what}: no weighted closed observations")));
    }
    if !(denominator > 0.0 && denominator.is_finite()) {
        return Err(Error::DegenerateFit(format!(
            "{what}: weighted denominator is {denominator}, need a positive finite value"
        )));
    }
    Ok(FitResult {
        estimate: numerator / denominator,
        weight_mass: numerator,
        method: FitMethod::ClosedForm,
        residual: 0.0,
    })
}

fn kernel_at(sample: &ExpertSample, i: usize) -> Result<BeliefKernel> {
    sample.beliefs()?[i].ok_or_else(|| {
        Error::Configuration(format!(
            "closed observation {} has no belief kernel",
            sample.base().original_index(i)
        ))
    })
}

/// Crude Exponential rate `Σ c_i / Σ c_i W_i`.
pub fn fit_exponential_crude(sample: &ExpertSample) -> Result<FitResult> {
    let c = crude_weights(sample)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (o, ci) in sample.base().observations().iter().zip(&c) {
        num += ci;
        den += ci * o.w;
    }
    closed_form(num, den, "crude exponential fit")
}

/// Sophisticated Exponential rate `Σ c_i / Σ c_i E_{K_i}[t]`.
pub fn fit_exponential_sophisticated(sample: &ExpertSample) -> Result<FitResult> {
    let c = sophisticated_weights(sample)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, ci) in c.iter().enumerate() {
        if *ci == 0.0 {
            continue;
        }
        let k = kernel_at(sample, i)?;
        let m = k.mean();
        if !m.is_finite() {
            return Err(Error::Numeric(format!(
                "belief kernel of observation {} has infinite mean",
                sample.base().original_index(i)
            )));
        }
        num += ci;
        den += ci * m;
    }
    closed_form(num, den, "sophisticated exponential fit")
}

fn check_pareto_support(sample: &ExpertSample, i: usize, support: f64, sigma: f64, strict: bool) -> Result<()> {
    if support < sigma || (strict && support == sigma) {
        return Err(Error::Validation(format!(
            "observation {} with positive weight lies at {support}, outside the Pareto support (> {sigma})",
            sample.base().original_index(i)
        )));
    }
    Ok(())
}

/// Pareto tail index with known scale `σ`:
/// `Σ c_i / Σ c_i ln(W_i/σ)` (crude) or `Σ c_i / Σ c_i E_{K_i}[ln(t/σ)]`
/// (sophisticated).
pub fn fit_pareto(sample: &ExpertSample, sigma: f64, mode: ExpertMode) -> Result<FitResult> {
    ParametricModel::pareto(sigma)?;
    let c = weights_for(sample, mode)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, ci) in c.iter().enumerate() {
        if *ci == 0.0 {
            continue;
        }
        let log_ratio = match mode {
            ExpertMode::Crude => {
                let w = sample.base().get(i).w;
                check_pareto_support(sample, i, w, sigma, true)?;
                (w / sigma).ln()
            }
            ExpertMode::Sophisticated => {
                let k = kernel_at(sample, i)?;
                let strict = k.kind() == KernelKind::Dirac;
                check_pareto_support(sample, i, k.support_min(), sigma, strict)?;
                k.expected_log_ratio(sigma)?
            }
        };
        num += ci;
        den += ci * log_ratio;
    }
    closed_form(num, den, "Pareto fit")
}

/// Hill-type tail index from the top `k` order statistics relative to the
/// threshold `W_{n-k:n}`.
pub fn fit_hill(sample: &ExpertSample, k: usize, mode: ExpertMode) -> Result<FitResult> {
    let n = sample.len();
    if k == 0 || k >= n {
        return Err(Error::Validation(format!("Hill estimator needs 1 <= k <= n - 1 = {}, got k = {k}", n.saturating_sub(1))));
    }
    let threshold = sample.base().get(n - k - 1).w;
    if !(threshold > 0.0) {
        return Err(Error::Validation(format!("Hill threshold W_(n-k) must be positive, got {threshold}")));
    }
    let c = weights_for(sample, mode)?;
    let (mut num, mut den) = (0.0, 0.0);
    for i in n - k..n {
        let ci = c[i];
        if ci == 0.0 {
            continue;
        }
        let log_ratio = match mode {
            ExpertMode::Crude => (sample.base().get(i).w / threshold).ln(),
            ExpertMode::Sophisticated => kernel_at(sample, i)?.expected_log_ratio(threshold)?,
        };
        num += ci;
        den += ci * log_ratio;
    }
    closed_form(num, den, &format!("Hill fit (k = {k})"))
}

/// Hill numerator expressed through the fitted curve:
/// `n (F(W_{n:n}) - F(W_{n-k:n}))`, with `F` the crude IPCW estimator or
/// the usual Kaplan–Meier estimator. Equals `n (1 - F(W_{n-k:n}))` when the
/// curve reaches one at the largest observation.
pub fn hill_numerator_from_curve(sample: &ExpertSample, k: usize, mode: ExpertMode) -> Result<f64> {
    let n = sample.len();
    if k == 0 || k >= n {
        return Err(Error::Validation(format!("k = {k} out of range for n = {n}")));
    }
    let curve = match mode {
        ExpertMode::Crude => crate::expert::crude_km_ipcw(sample)?,
        ExpertMode::Sophisticated => crate::expert::usual_km_ipcw(sample)?,
    };
    let top = sample.base().get(n - 1).w;
    let threshold = sample.base().get(n - k - 1).w;
    Ok(n as f64 * (curve.evaluate(top) - curve.evaluate(threshold)))
}

/// Tail-index estimates for every `k = 1, ..., n - 1`.
pub fn hill_sweep(sample: &ExpertSample, mode: ExpertMode) -> Vec<(usize, Result<FitResult>)> {
    (1..sample.len()).map(|k| (k, fit_hill(sample, k, mode))).collect()
}

// ---------------------------------------------------------------------------
// Numeric maximiser
// ---------------------------------------------------------------------------

enum Term {
    Point(f64),
    Kernel(BeliefKernel),
}

struct Objective {
    model: ParametricModel,
    terms: Vec<(f64, Term)>,
    mass: f64,
}

impl Objective {
    /// Weighted expected log-density per unit weight at `θ = e^u`.
    fn value(&self, u: f64) -> Result<f64> {
        let theta = u.exp();
        let mut acc = 0.0;
        for (c, term) in &self.terms {
            let l = match term {
                Term::Point(w) => self.model.log_density(theta, *w),
                Term::Kernel(k) => expected_log_density(k, &self.model, theta)?,
            };
            acc += c * l;
        }
        Ok(acc / self.mass)
    }

    fn slope(&self, u: f64) -> Result<f64> {
        const H: f64 = 1e-5;
        Ok((self.value(u + H)? - self.value(u - H)?) / (2.0 * H))
    }
}

const SCAN_LO: f64 = -40.0;
const SCAN_HI: f64 = 40.0;
const SCAN_STEP: f64 = 0.5;
const GRADIENT_TOL: f64 = 1e-9;

fn maximise(obj: &Objective) -> Result<FitResult> {
    if !(obj.mass > 0.0) {
        return Err(Error::DegenerateFit("numeric fit: no weighted closed observations".into()));
    }
    let steps = ((SCAN_HI - SCAN_LO) / SCAN_STEP) as usize;
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut scan = Vec::with_capacity(steps + 1);
    for j in 0..=steps {
        let u = SCAN_LO + j as f64 * SCAN_STEP;
        let v = obj.value(u)?;
        scan.push(v);
        if v > best.1 {
            best = (j, v);
        }
    }
    let j = best.0;
    if j == 0 || j == steps || !best.1.is_finite() {
        return Err(Error::Numeric(format!(
            "numeric fit: no interior bracket on log-parameter range [{SCAN_LO}, {SCAN_HI}] \
             (best at u = {}, objective {}, end values {} / {})",
            SCAN_LO + j as f64 * SCAN_STEP,
            best.1,
            scan[0],
            scan[steps]
        )));
    }
    // Bisection on the sign of the (central-difference) slope.
    let mut lo = SCAN_LO + (j - 1) as f64 * SCAN_STEP;
    let mut hi = SCAN_LO + (j + 1) as f64 * SCAN_STEP;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if obj.slope(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let residual = obj.slope(u)?.abs();
    if residual > GRADIENT_TOL {
        return Err(Error::Numeric(format!(
            "numeric fit stopped at u = {u} with normalised gradient {residual:e}"
        )));
    }
    Ok(FitResult {
        estimate: u.exp(),
        weight_mass: obj.mass,
        method: FitMethod::Numeric,
        residual,
    })
}

fn build_terms(sample: &ExpertSample, mode: ExpertMode, range: std::ops::Range<usize>) -> Result<(Vec<(f64, Term)>, f64)> {
    let c = weights_for(sample, mode)?;
    let mut terms = Vec::new();
    let mut mass = 0.0;
    for i in range {
        if c[i] == 0.0 {
            continue;
        }
        let term = match mode {
            ExpertMode::Crude => Term::Point(sample.base().get(i).w),
            ExpertMode::Sophisticated => Term::Kernel(kernel_at(sample, i)?),
        };
        mass += c[i];
        terms.push((c[i], term));
    }
    Ok((terms, mass))
}

/// Maximises the weighted expected log-likelihood numerically, by a scan
/// over `ln θ` followed by bisection on the slope. Serves as an independent
/// check of the closed forms.
pub fn fit_numeric(sample: &ExpertSample, model: ParametricModel, mode: ExpertMode) -> Result<FitResult> {
    if let ParametricModel::Pareto { sigma } = model {
        ParametricModel::pareto(sigma)?;
    }
    let (terms, mass) = build_terms(sample, mode, 0..sample.len())?;
    if let ParametricModel::Pareto { sigma } = model {
        for (i, (_, t)) in terms.iter().enumerate() {
            let (support, strict) = match t {
                Term::Point(w) => (*w, true),
                Term::Kernel(k) => (k.support_min(), k.kind() == KernelKind::Dirac),
            };
            check_pareto_support(sample, i, support, sigma, strict)?;
        }
    }
    maximise(&Objective { model, terms, mass })
}

/// Numeric counterpart of [`fit_hill`]: a known-scale Pareto fit to the top
/// `k` observations with scale `W_{n-k:n}`.
pub fn fit_numeric_hill(sample: &ExpertSample, k: usize, mode: ExpertMode) -> Result<FitResult> {
    let n = sample.len();
    if k == 0 || k >= n {
        return Err(Error::Validation(format!("k = {k} out of range for n = {n}")));
    }
    let threshold = sample.base().get(n - k - 1).w;
    let model = ParametricModel::pareto(threshold)?;
    let (terms, mass) = build_terms(sample, mode, n - k..n)?;
    maximise(&Objective { model, terms, mass })
}
