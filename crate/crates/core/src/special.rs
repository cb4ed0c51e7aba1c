//! Special functions: the (non-normalised) upper incomplete gamma function
//! and the standard normal upper tail.

use libm::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// `ln γ̄(s, x)` where `γ̄(s, x) = ∫_x^∞ t^{s-1} e^{-t} dt`.
///
/// Uses the power series for the lower function when `x < s + 1` and a
/// modified-Lentz continued fraction otherwise. Working in logs keeps
/// ratios such as `γ̄(s+1, x) / γ̄(s, x)` finite for large `x`.
pub fn ln_upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) || !(x >= 0.0) {
        return Err(Error::Numeric(format!(
            "upper incomplete gamma needs s > 0 and x >= 0, got s = {s}, x = {x}"
        )));
    }
    if x.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    let lg = ln_gamma(s);
    if x == 0.0 {
        return Ok(lg);
    }
    let ln_prefactor = s * x.ln() - x;
    if x < s + 1.0 {
        // Lower regularised P(s, x) by series, then Q = 1 - P.
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut ap = s;
        let mut converged = false;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "incomplete gamma series did not converge for s = {s}, x = {x}"
            )));
        }
        let p = (ln_prefactor - lg + sum.ln()).exp();
        Ok(lg + (-p).ln_1p())
    } else {
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut converged = false;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "incomplete gamma continued fraction did not converge for s = {s}, x = {x}"
            )));
        }
        Ok(ln_prefactor + h.ln())
    }
}

/// Upper incomplete gamma function `γ̄(s, x) = ∫_x^∞ t^{s-1} e^{-t} dt`.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    let ln = ln_upper_incomplete_gamma(s, x)?;
    let v = ln.exp();
    if !v.is_finite() {
        return Err(Error::Numeric(format!(
            "upper incomplete gamma overflows for s = {s}, x = {x}"
        )));
    }
    Ok(v)
}

/// Standard normal upper tail `1 - Φ(z)`, accurate far into the right tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    (-0.5 * z * z).exp() * INV_SQRT_2PI
}
