//! Contamination-aware estimators: the crude expert estimator (judgment
//! weighted product limit), the sophisticated expert estimator (IPCW
//! average of belief kernels) and the oracle estimator (IPCW average of
//! indicators at the hidden event times).

use crate::curve::StepCurve;
use crate::error::{Error, Result};
use crate::kernel::BeliefKernel;
use crate::product_limit::{self, ipcw_curve, ipcw_weights, km_censor, km_censor_weighted, km_event, KmCurve};
use crate::sample::{sort_sample, Observation, SortedSample, TieOrder};

/// A sorted sample together with the expert information attached to it.
///
/// Crude judgments live on the observations (`eta`); belief kernels are
/// stored in sorted order, one slot per observation, filled for closed
/// claims only.
#[derive(Debug, Clone)]
pub struct ExpertSample {
    base: SortedSample,
    beliefs: Option<Vec<Option<BeliefKernel>>>,
}

impl ExpertSample {
    pub fn new(obs: &[Observation]) -> Result<Self> {
        Ok(Self {
            base: sort_sample(obs, TieOrder::EventFirst)?,
            beliefs: None,
        })
    }

    /// `kernels` is aligned with `obs` (input order).
    pub fn with_beliefs(obs: &[Observation], kernels: Vec<Option<BeliefKernel>>) -> Result<Self> {
        let base = sort_sample(obs, TieOrder::EventFirst)?;
        Self::from_sorted(base, kernels)
    }

    /// `kernels` is aligned with the original (unsorted) input of `base`.
    pub fn from_sorted(base: SortedSample, kernels: Vec<Option<BeliefKernel>>) -> Result<Self> {
        if kernels.len() != base.len() {
            return Err(Error::Validation(format!(
                "expected {} belief slots, got {}",
                base.len(),
                kernels.len()
            )));
        }
        let sorted: Vec<Option<BeliefKernel>> =
            (0..base.len()).map(|i| kernels[base.original_index(i)]).collect();
        for (i, (o, k)) in base.observations().iter().zip(&sorted).enumerate() {
            let idx = base.original_index(i);
            match (o.delta, k) {
                (false, Some(_)) => {
                    return Err(Error::obs(idx, "belief kernel attached to an open claim"));
                }
                (true, None) => {
                    return Err(Error::Configuration(format!(
                        "closed observation {idx} has no belief kernel"
                    )));
                }
                (true, Some(k)) if k.lower() < o.w => {
                    return Err(Error::obs(
                        idx,
                        format!("belief kernel places mass below W = {} (lower = {})", o.w, k.lower()),
                    ));
                }
                _ => {}
            }
        }
        Ok(Self { base, beliefs: Some(sorted) })
    }

    pub fn base(&self) -> &SortedSample {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn judgments(&self) -> Result<Vec<f64>> {
        self.base.judgments()
    }

    /// Belief kernels in sorted order.
    pub fn beliefs(&self) -> Result<&[Option<BeliefKernel>]> {
        self.beliefs
            .as_deref()
            .ok_or_else(|| Error::Configuration("sophisticated estimator needs belief kernels".into()))
    }
}

/// Usual Kaplan–Meier estimator, ignoring any expert information.
pub fn usual_km(sample: &ExpertSample) -> Result<KmCurve> {
    km_event(sample.base(), &sample.base().deltas())
}

/// Crude expert estimator: the product limit with judgments in place of
/// the closed/open indicators.
pub fn crude_km(sample: &ExpertSample) -> Result<KmCurve> {
    let eta = sample.judgments()?;
    km_event(sample.base(), &eta)
}

/// IPCW form of the crude estimator, with the censoring-side product limit
/// built from `1 - eta`. Agrees with [`crude_km`] for binary judgments.
pub fn crude_km_ipcw(sample: &ExpertSample) -> Result<StepCurve> {
    let eta = sample.judgments()?;
    let censor = km_censor_weighted(sample.base(), &eta)?;
    product_limit::km_ipcw(sample.base(), &eta, &censor)
}

/// Sophisticated expert estimator
/// `F(t) = (1/n) Σ K_i(t) δ_i / (1 - G(W_i-))`.
///
/// Kernel mixtures are not step functions, so the estimate is kept as its
/// components and evaluated exactly at any `t`.
#[derive(Debug, Clone)]
pub struct MixtureCurve {
    n: usize,
    components: Vec<(f64, BeliefKernel)>,
}

impl MixtureCurve {
    pub fn evaluate(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (c, k) in &self.components {
            acc += k.cdf(t) * c;
        }
        acc / self.n as f64
    }

    /// Total IPCW mass `(1/n) Σ δ_i / (1 - G(W_i-))`, the supremum of the
    /// curve.
    pub fn total_mass(&self) -> f64 {
        self.components.iter().map(|(c, _)| c).sum::<f64>() / self.n as f64
    }

    pub fn components(&self) -> &[(f64, BeliefKernel)] {
        &self.components
    }

    pub fn on_grid(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&t| self.evaluate(t)).collect()
    }
}

pub fn sophisticated_km(sample: &ExpertSample) -> Result<MixtureCurve> {
    let beliefs = sample.beliefs()?;
    let base = sample.base();
    let censor = km_censor(base)?;
    let c = ipcw_weights(base, &base.deltas(), &censor)?;
    let components = c
        .iter()
        .zip(beliefs)
        .filter_map(|(&ci, k)| k.map(|k| (ci, k)))
        .filter(|(ci, _)| *ci > 0.0)
        .collect();
    Ok(MixtureCurve { n: base.len(), components })
}

/// Oracle estimator `(1/n) Σ 1{X_i <= t} δ_i / (1 - G(W_i-))`, using the
/// hidden event times of simulated data.
pub fn oracle_km(sample: &ExpertSample) -> Result<StepCurve> {
    let base = sample.base();
    let censor = km_censor(base)?;
    let c = ipcw_weights(base, &base.deltas(), &censor)?;
    let n = base.len() as f64;
    let mut increments = Vec::new();
    for (i, o) in base.observations().iter().enumerate() {
        if !o.delta {
            continue;
        }
        let x = o.x_true.ok_or_else(|| {
            Error::Configuration(format!(
                "oracle estimator needs x_true on closed observation {}",
                base.original_index(i)
            ))
        })?;
        increments.push((x, c[i] / n));
    }
    Ok(StepCurve::from_increments(increments))
}

/// Usual Kaplan–Meier estimator in IPCW form (sorted accumulation).
pub fn usual_km_ipcw(sample: &ExpertSample) -> Result<StepCurve> {
    let base = sample.base();
    let censor = km_censor(base)?;
    let c = ipcw_weights(base, &base.deltas(), &censor)?;
    Ok(ipcw_curve(base, &c))
}

/// Export grid: every observed value plus `points` equispaced points on
/// `[0, max W]`, sorted and deduplicated.
pub fn export_grid(w: &[f64], points: usize) -> Vec<f64> {
    let max_w = w.iter().copied().fold(0.0f64, f64::max);
    let mut grid: Vec<f64> = w.to_vec();
    if points == 1 {
        grid.push(0.0);
    } else if points > 1 {
        let step = max_w / (points - 1) as f64;
        grid.extend((0..points).map(|i| if i + 1 == points { max_w } else { i as f64 * step }));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}
