//! Product-limit (Kaplan–Meier) machinery: the event-side estimator, the
//! censoring-side estimator, the empirical cumulative hazard and the inverse
//! probability of censoring weighted (IPCW) representation.

use serde::{Deserialize, Serialize};

use crate::curve::StepCurve;
use crate::error::{Error, Result};
use crate::sample::{check_weights, SortedSample};

/// Guard on `1 - G(W-)` below which an inverse-censoring weight is refused.
pub const DIVISION_EPS: f64 = 1e-12;

/// A product-limit CDF estimate with its risk-set sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmCurve {
    pub curve: StepCurve,
    /// Risk-set size `n - i + 1` at the first rank of each jump.
    pub at_risk: Vec<usize>,
    /// Largest observed value; the estimate is held constant beyond it.
    pub last_obs: f64,
}

impl KmCurve {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.curve.evaluate(t)
    }

    pub fn left_limit(&self, t: f64) -> f64 {
        self.curve.left_limit(t)
    }

    /// `1 - F(t)`.
    pub fn survival(&self, t: f64) -> f64 {
        1.0 - self.curve.evaluate(t)
    }
}

/// `1 - F(t) = Π_{W_(i) <= t} (1 - weight_(i) / (n - i + 1))` over the
/// sample's stored order.
fn product_limit(sample: &SortedSample, weights: &[f64]) -> Result<KmCurve> {
    check_weights(sample, weights)?;
    let n = sample.len();
    let mut survival = 1.0;
    let mut points = Vec::new();
    let mut at_risk = Vec::new();
    let mut i = 0;
    while i < n {
        let w = sample.get(i).w;
        let group_start = i;
        let before = survival;
        while i < n && sample.get(i).w == w {
            let r = sample.rank_at_risk(i) as f64;
            survival *= 1.0 - weights[i] / r;
            i += 1;
        }
        if survival != before {
            points.push((w, 1.0 - survival));
            at_risk.push(sample.rank_at_risk(group_start));
        }
    }
    Ok(KmCurve {
        curve: StepCurve::from_sorted_values(0.0, points),
        at_risk,
        last_obs: sample.max_w().unwrap_or(0.0),
    })
}

/// Event-side product-limit estimator with per-observation weights (sorted
/// order). With `delta` this is the usual Kaplan–Meier estimator, with crude
/// judgments it is the crude expert estimator.
pub fn km_event(sample: &SortedSample, weights: &[f64]) -> Result<KmCurve> {
    product_limit(sample, weights)
}

/// Kaplan–Meier estimator of the censoring distribution, built from the
/// indicators `1 - delta`.
pub fn km_censor(sample: &SortedSample) -> Result<KmCurve> {
    let indicators: Vec<f64> = sample.deltas().iter().map(|d| 1.0 - d).collect();
    product_limit(sample, &indicators)
}

/// Censoring-side product limit for arbitrary event weights: the indicators
/// are `1 - weight_i`, ordered as the sample stores them.
pub fn km_censor_weighted(sample: &SortedSample, weights: &[f64]) -> Result<KmCurve> {
    check_weights(sample, weights)?;
    let indicators: Vec<f64> = weights.iter().map(|w| 1.0 - w).collect();
    product_limit(sample, &indicators)
}

/// Empirical cumulative hazard
/// `Λ(t) = Σ_{W_i <= t} weight_i / (n (1 - H(W_i-)))`, where the
/// denominator counts every observation with `W >= W_i`.
pub fn cumulative_hazard(sample: &SortedSample, weights: &[f64]) -> Result<StepCurve> {
    check_weights(sample, weights)?;
    let mut acc = 0.0;
    let points: Vec<(f64, f64)> = (0..sample.len())
        .map(|i| {
            acc += weights[i] / sample.group_at_risk(i) as f64;
            (sample.get(i).w, acc)
        })
        .collect();
    Ok(StepCurve::from_sorted_values(0.0, points))
}

/// Inverse-censoring weights `weight_i / (1 - G(W_i-))` in sorted order.
///
/// Observations with zero weight get zero and are exempt from the guard.
pub fn ipcw_weights(sample: &SortedSample, weights: &[f64], censor: &KmCurve) -> Result<Vec<f64>> {
    check_weights(sample, weights)?;
    sample
        .observations()
        .iter()
        .enumerate()
        .map(|(i, o)| {
            if weights[i] == 0.0 {
                return Ok(0.0);
            }
            let denom = 1.0 - censor.left_limit(o.w);
            if denom <= DIVISION_EPS {
                return Err(Error::DegenerateWeight {
                    index: sample.original_index(i),
                    w: o.w,
                    denominator: denom,
                });
            }
            Ok(weights[i] / denom)
        })
        .collect()
}

/// IPCW form `F(t) = (1/n) Σ 1{W_i <= t} weight_i / (1 - G(W_i-))`.
pub fn km_ipcw(sample: &SortedSample, weights: &[f64], censor: &KmCurve) -> Result<StepCurve> {
    let c = ipcw_weights(sample, weights, censor)?;
    Ok(ipcw_curve(sample, &c))
}

/// Accumulates already-computed IPCW weights in sorted order.
pub(crate) fn ipcw_curve(sample: &SortedSample, c: &[f64]) -> StepCurve {
    let n = sample.len() as f64;
    let mut acc = 0.0;
    let points: Vec<(f64, f64)> = sample
        .observations()
        .iter()
        .zip(c)
        .map(|(o, ci)| {
            acc += ci;
            (o.w, acc / n)
        })
        .collect();
    StepCurve::from_sorted_values(0.0, points)
}
