//! Belief kernels: per-observation distributions on `[W_i, ∞)` expressing
//! a sophisticated expert's view of the true event time.
//!
//! A kernel's CDF is the mass on `[lower, t]` (closed on the right), so a
//! Dirac kernel at `W_i` reproduces `1{W_i <= t}` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::product_limit::DIVISION_EPS;
use crate::quadrature::integrate;
use crate::semiparametric::ParametricModel;
use crate::special::{ln_upper_incomplete_gamma, normal_pdf, normal_sf};

/// Tail mass left outside the quadrature range.
const TAIL_MASS: f64 = 1e-14;
const QUAD_ABS_TOL: f64 = 1e-10;
const QUAD_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Dirac,
    TruncatedGaussian,
    TruncatedGamma,
    Uniform,
}

impl KernelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelKind::Dirac => "dirac",
            KernelKind::TruncatedGaussian => "truncated-gaussian",
            KernelKind::TruncatedGamma => "truncated-gamma",
            KernelKind::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirac" => Ok(KernelKind::Dirac),
            "truncated-gaussian" => Ok(KernelKind::TruncatedGaussian),
            "truncated-gamma" => Ok(KernelKind::TruncatedGamma),
            "uniform" => Ok(KernelKind::Uniform),
            other => Err(Error::Validation(format!("unknown kernel kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// Point mass; `atom = +∞` is an improper belief that the event never
    /// happens.
    Dirac { atom: f64 },
    /// Gaussian `(location, scale)` conditioned on `[lower, ∞)`;
    /// `tail` caches `1 - Φ((lower - location) / scale)`.
    TruncatedGaussian { location: f64, scale: f64, tail: f64 },
    /// Gamma `(shape, rate)` conditioned on `[lower, ∞)`;
    /// `ln_norm = ln γ̄(shape, rate · lower)`.
    TruncatedGamma { shape: f64, rate: f64, ln_norm: f64 },
    Uniform { upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefKernel {
    lower: f64,
    shape: Shape,
}

fn check_lower(lower: f64) -> Result<()> {
    if !(lower.is_finite() && lower >= 0.0) {
        return Err(Error::Validation(format!("kernel lower bound must be finite and >= 0, got {lower}")));
    }
    Ok(())
}

impl BeliefKernel {
    pub fn dirac(lower: f64, atom: f64) -> Result<Self> {
        check_lower(lower)?;
        if atom.is_nan() || atom < lower {
            return Err(Error::Validation(format!(
                "dirac atom {atom} lies below the kernel lower bound {lower}"
            )));
        }
        Ok(Self { lower, shape: Shape::Dirac { atom } })
    }

    /// Point mass at the observation itself.
    pub fn dirac_at(w: f64) -> Result<Self> {
        Self::dirac(w, w)
    }

    pub fn truncated_gaussian(lower: f64, location: f64, scale: f64) -> Result<Self> {
        check_lower(lower)?;
        if !location.is_finite() || !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Validation(format!(
                "truncated gaussian needs finite location and scale > 0, got ({location}, {scale})"
            )));
        }
        let tail = normal_sf((lower - location) / scale);
        if tail < DIVISION_EPS {
            return Err(Error::Validation(format!(
                "truncated gaussian normaliser {tail:e} is degenerate (lower = {lower}, location = {location}, scale = {scale})"
            )));
        }
        Ok(Self { lower, shape: Shape::TruncatedGaussian { location, scale, tail } })
    }

    pub fn truncated_gamma(lower: f64, shape: f64, rate: f64) -> Result<Self> {
        check_lower(lower)?;
        if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
            return Err(Error::Validation(format!(
                "truncated gamma needs shape > 0 and rate > 0, got ({shape}, {rate})"
            )));
        }
        let ln_norm = ln_upper_incomplete_gamma(shape, rate * lower)?;
        if !ln_norm.is_finite() {
            return Err(Error::Validation(format!(
                "truncated gamma normaliser vanishes (lower = {lower}, shape = {shape}, rate = {rate})"
            )));
        }
        Ok(Self { lower, shape: Shape::TruncatedGamma { shape, rate, ln_norm } })
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        check_lower(lower)?;
        if !(upper.is_finite() && upper > lower) {
            return Err(Error::Validation(format!(
                "uniform kernel needs a finite upper bound above {lower}, got {upper}"
            )));
        }
        Ok(Self { lower, shape: Shape::Uniform { upper } })
    }

    /// Builds a kernel from the kernel-file parameters `(p1, p2)`.
    pub fn from_params(kind: KernelKind, lower: f64, p1: f64, p2: Option<f64>) -> Result<Self> {
        let need = |p: Option<f64>| {
            p.ok_or_else(|| Error::Validation(format!("kernel kind '{}' needs parameter p2", kind.as_str())))
        };
        match kind {
            KernelKind::Dirac => Self::dirac(lower, p1),
            KernelKind::TruncatedGaussian => Self::truncated_gaussian(lower, p1, need(p2)?),
            KernelKind::TruncatedGamma => Self::truncated_gamma(lower, p1, need(p2)?),
            KernelKind::Uniform => Self::uniform(lower, p1),
        }
    }

    pub fn kind(&self) -> KernelKind {
        match self.shape {
            Shape::Dirac { .. } => KernelKind::Dirac,
            Shape::TruncatedGaussian { .. } => KernelKind::TruncatedGaussian,
            Shape::TruncatedGamma { .. } => KernelKind::TruncatedGamma,
            Shape::Uniform { .. } => KernelKind::Uniform,
        }
    }

    /// Kernel-file parameters `(p1, p2)`.
    pub fn params(&self) -> (f64, Option<f64>) {
        match self.shape {
            Shape::Dirac { atom } => (atom, None),
            Shape::TruncatedGaussian { location, scale, .. } => (location, Some(scale)),
            Shape::TruncatedGamma { shape, rate, .. } => (shape, Some(rate)),
            Shape::Uniform { upper } => (upper, None),
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Smallest point of the support.
    pub fn support_min(&self) -> f64 {
        match self.shape {
            Shape::Dirac { atom } => atom,
            _ => self.lower,
        }
    }

    /// Mass on `[lower, t]`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t < self.lower {
            return 0.0;
        }
        match self.shape {
            Shape::Dirac { atom } => {
                if t >= atom {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::TruncatedGaussian { location, scale, tail } => {
                let v = (tail - normal_sf((t - location) / scale)) / tail;
                v.clamp(0.0, 1.0)
            }
            Shape::TruncatedGamma { .. } => (1.0 - self.survival(t)).clamp(0.0, 1.0),
            Shape::Uniform { upper } => ((t.min(upper) - self.lower) / (upper - self.lower)).clamp(0.0, 1.0),
        }
    }

    /// Mass on `(t, ∞)`, computed without cancellation in the right tail.
    pub fn survival(&self, t: f64) -> f64 {
        if t < self.lower {
            return 1.0;
        }
        match self.shape {
            Shape::TruncatedGaussian { location, scale, tail } => {
                (normal_sf((t - location) / scale) / tail).min(1.0)
            }
            Shape::TruncatedGamma { shape, rate, ln_norm } => match ln_upper_incomplete_gamma(shape, rate * t) {
                Ok(l) => (l - ln_norm).exp().min(1.0),
                Err(_) => f64::NAN,
            },
            _ => 1.0 - self.cdf(t),
        }
    }

    /// Lebesgue density on `[lower, ∞)`; `None` for a point mass.
    pub fn pdf(&self, t: f64) -> Option<f64> {
        if let Shape::Dirac { .. } = self.shape {
            return None;
        }
        if t < self.lower {
            return Some(0.0);
        }
        Some(match self.shape {
            Shape::TruncatedGaussian { location, scale, tail } => normal_pdf((t - location) / scale) / (scale * tail),
            Shape::TruncatedGamma { shape, rate, ln_norm } => {
                if t == 0.0 {
                    return Some(if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        (rate.ln() - ln_norm).exp()
                    } else {
                        0.0
                    });
                }
                (shape * rate.ln() + (shape - 1.0) * t.ln() - rate * t - ln_norm).exp()
            }
            Shape::Uniform { upper } => {
                if t <= upper {
                    1.0 / (upper - self.lower)
                } else {
                    0.0
                }
            }
            Shape::Dirac { .. } => unreachable!(),
        })
    }

    /// Mean of the truncated law. Infinite for an improper Dirac at `+∞`.
    pub fn mean(&self) -> f64 {
        match self.shape {
            Shape::Dirac { atom } => atom,
            Shape::TruncatedGaussian { location, scale, tail } => {
                let z = (self.lower - location) / scale;
                location + scale * normal_pdf(z) / tail
            }
            Shape::TruncatedGamma { shape, rate, ln_norm } => {
                // γ̄(α + 1, βL) / (β γ̄(α, βL))
                match ln_upper_incomplete_gamma(shape + 1.0, rate * self.lower) {
                    Ok(l) => (l - ln_norm).exp() / rate,
                    Err(_) => f64::NAN,
                }
            }
            Shape::Uniform { upper } => 0.5 * (self.lower + upper),
        }
    }

    /// Right end of an interval carrying all but `TAIL_MASS` of the kernel.
    pub(crate) fn effective_upper(&self) -> Result<f64> {
        let start = match self.shape {
            Shape::Dirac { atom } => return Ok(atom),
            Shape::Uniform { upper } => return Ok(upper),
            Shape::TruncatedGaussian { location, scale, .. } => self.lower.max(location) + 8.0 * scale,
            Shape::TruncatedGamma { shape, rate, .. } => {
                self.lower.max(shape / rate) + 10.0 * shape.sqrt() / rate
            }
        };
        let mut step = (start - self.lower).max(1e-300);
        let mut upper = start;
        for _ in 0..200 {
            if self.survival(upper) < TAIL_MASS {
                return Ok(upper);
            }
            step *= 2.0;
            upper = self.lower + step;
        }
        Err(Error::Numeric(format!("could not bound the support of kernel {self:?}")))
    }

    /// Integrates `g` against the kernel: `∫ g(t) K(dt)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64> {
        match self.shape {
            Shape::Dirac { atom } => Ok(g(atom)),
            _ => {
                let upper = self.effective_upper()?;
                let r = integrate(|t| g(t) * self.pdf(t).unwrap_or(0.0), self.lower, upper, QUAD_ABS_TOL, QUAD_REL_TOL)?;
                Ok(r.value)
            }
        }
    }

    /// `∫ ln(t / reference) K(dt)`; the kernel support must lie in
    /// `[reference, ∞)`.
    pub fn expected_log_ratio(&self, reference: f64) -> Result<f64> {
        if !(reference > 0.0 && reference.is_finite()) {
            return Err(Error::Validation(format!("log reference must be positive, got {reference}")));
        }
        if self.support_min() < reference {
            return Err(Error::Validation(format!(
                "kernel support starts at {} below the log reference {reference}",
                self.support_min()
            )));
        }
        let v = match self.shape {
            Shape::Dirac { atom } => (atom / reference).ln(),
            Shape::Uniform { upper } => {
                let antiderivative = |t: f64| t * (t / reference).ln() - t;
                (antiderivative(upper) - antiderivative(self.lower)) / (upper - self.lower)
            }
            _ => self.expect(|t| (t / reference).ln())?,
        };
        if !v.is_finite() {
            return Err(Error::Numeric(format!(
                "log moment of kernel {:?} relative to {reference} is not finite",
                self.kind()
            )));
        }
        Ok(v)
    }
}

/// `∫ ln f_θ(t) K(dt)` for the given parametric family.
///
/// Exponential: `ln λ - λ E_K[t]` (closed form for every kernel, including
/// the incomplete-gamma ratio for truncated Gamma kernels). Pareto with
/// known scale `σ`: `ln α - ln σ - (α + 1) E_K[ln(t/σ)]`, where the log
/// moment is closed-form for Dirac and uniform kernels and uses adaptive
/// quadrature otherwise.
pub fn expected_log_density(k: &BeliefKernel, model: &ParametricModel, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Validation(format!("parameter must be positive, got {theta}")));
    }
    match *model {
        ParametricModel::Exponential => {
            let m = k.mean();
            if !m.is_finite() {
                return Err(Error::Numeric(format!("kernel {:?} has no finite mean", k.kind())));
            }
            Ok(theta.ln() - theta * m)
        }
        ParametricModel::Pareto { sigma } => {
            let l = k.expected_log_ratio(sigma)?;
            Ok(theta.ln() - sigma.ln() - (theta + 1.0) * l)
        }
    }
}
