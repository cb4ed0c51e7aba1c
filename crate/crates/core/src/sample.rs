//! Observations, tie-consistent ordering, and the empirical counting
//! processes `H` (all observations) and `H_1` (weighted closed claims).

use serde::{Deserialize, Serialize};

use crate::curve::StepCurve;
use crate::error::{Error, Result};

/// One subject: the observed value `w`, the closed/open indicator `delta`,
/// an optional crude expert judgment `eta`, and (for simulated data) the
/// hidden event, contamination and censoring times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub w: f64,
    pub delta: bool,
    pub eta: Option<f64>,
    pub x_true: Option<f64>,
    pub y_true: Option<f64>,
    pub c_true: Option<f64>,
}

impl Observation {
    pub fn new(w: f64, delta: bool) -> Self {
        Self {
            w,
            delta,
            eta: None,
            x_true: None,
            y_true: None,
            c_true: None,
        }
    }

    pub fn closed(w: f64) -> Self {
        Self::new(w, true)
    }

    pub fn open(w: f64) -> Self {
        Self::new(w, false)
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    /// Assembles an observation from hidden event time `x`, contamination
    /// time `y` and censoring time `c`: `W = x ∧ y ∧ c`, closed iff
    /// `x ∧ y ≤ c`.
    pub fn from_truth(x: f64, y: f64, c: f64) -> Self {
        let xy = x.min(y);
        Self {
            w: xy.min(c),
            delta: xy <= c,
            eta: None,
            x_true: Some(x),
            y_true: Some(y),
            c_true: Some(c),
        }
    }

    pub fn delta_f64(&self) -> f64 {
        if self.delta {
            1.0
        } else {
            0.0
        }
    }

    /// Closed, but the closing event was the contamination time.
    pub fn is_contaminated(&self) -> Option<bool> {
        match (self.x_true, self.y_true) {
            (Some(x), Some(y)) => Some(self.delta && y < x),
            _ => None,
        }
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        if !(self.w.is_finite() && self.w >= 0.0) {
            return Err(Error::obs(index, format!("w must be finite and >= 0, got {}", self.w)));
        }
        if let Some(eta) = self.eta {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::obs(index, format!("eta must lie in [0, 1], got {eta}")));
            }
            if !self.delta && eta != 0.0 {
                return Err(Error::obs(index, "an open claim (delta = 0) must have eta = 0"));
            }
        }
        if let Some(x) = self.x_true {
            if x.is_nan() || x < 0.0 {
                return Err(Error::obs(index, format!("x_true must be >= 0, got {x}")));
            }
        }
        for (name, v) in [("y_true", self.y_true), ("c_true", self.c_true)] {
            if let Some(v) = v {
                if v.is_nan() || v < 0.0 {
                    return Err(Error::obs(index, format!("{name} must be >= 0, got {v}")));
                }
            }
        }
        if let (Some(x), Some(y), Some(c)) = (self.x_true, self.y_true, self.c_true) {
            let xy = x.min(y);
            if xy.min(c) != self.w || (xy <= c) != self.delta {
                return Err(Error::obs(
                    index,
                    "hidden truth inconsistent with (w, delta): need w = min(x, y, c) and delta = [min(x, y) <= c]",
                ));
            }
        }
        Ok(())
    }
}

/// Which estimator family an ordering is built for.
///
/// Both conventions put closed claims ahead of open claims inside a tie
/// group: for the event-side product closed claims are the events, for the
/// censoring-side product (indicator `1 - delta`) the closed claims carry
/// indicator zero and are likewise taken first. The distinction is kept so
/// callers state which convention they rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieOrder {
    EventFirst,
    CensorFirst,
}

/// Observations in ascending order of `w` with the tie convention applied
/// once, at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    obs: Vec<Observation>,
    original_index: Vec<usize>,
    tie_rank: Vec<usize>,
    direction: TieOrder,
}

fn judgment_key(o: &Observation) -> f64 {
    o.eta.unwrap_or(o.delta_f64())
}

/// Sorts and validates a sample.
///
/// Within a tie group closed claims precede open ones; among closed claims
/// larger expert judgments come first so that the judgment-weighted product
/// follows the same "events first" rule.
pub fn sort_sample(obs: &[Observation], direction: TieOrder) -> Result<SortedSample> {
    for (i, o) in obs.iter().enumerate() {
        o.validate(i)?;
    }
    let mut order: Vec<usize> = (0..obs.len()).collect();
    order.sort_by(|&a, &b| {
        let (oa, ob) = (&obs[a], &obs[b]);
        oa.w.total_cmp(&ob.w)
            .then(ob.delta.cmp(&oa.delta))
            .then(judgment_key(ob).total_cmp(&judgment_key(oa)))
    });
    let sorted: Vec<Observation> = order.iter().map(|&i| obs[i]).collect();
    let mut tie_rank = Vec::with_capacity(sorted.len());
    for i in 0..sorted.len() {
        if i > 0 && sorted[i].w == sorted[i - 1].w {
            tie_rank.push(tie_rank[i - 1] + 1);
        } else {
            tie_rank.push(0);
        }
    }
    Ok(SortedSample {
        obs: sorted,
        original_index: order,
        tie_rank,
        direction,
    })
}

impl SortedSample {
    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.obs
    }

    pub fn get(&self, i: usize) -> &Observation {
        &self.obs[i]
    }

    pub fn direction(&self) -> TieOrder {
        self.direction
    }

    /// Position of sorted observation `i` in the caller's original input.
    pub fn original_index(&self, i: usize) -> usize {
        self.original_index[i]
    }

    pub fn original_indices(&self) -> &[usize] {
        &self.original_index
    }

    /// Rank of observation `i` within its tie group (0 for the first).
    pub fn tie_rank(&self, i: usize) -> usize {
        self.tie_rank[i]
    }

    /// Product-limit risk set size `n - i + 1` for (1-based) rank `i`.
    pub fn rank_at_risk(&self, i: usize) -> usize {
        self.obs.len() - i
    }

    /// Number of observations with `W >= W_i`, i.e. `n (1 - H(W_i-))`.
    pub fn group_at_risk(&self, i: usize) -> usize {
        self.obs.len() - (i - self.tie_rank[i])
    }

    pub fn w_values(&self) -> Vec<f64> {
        self.obs.iter().map(|o| o.w).collect()
    }

    pub fn max_w(&self) -> Option<f64> {
        self.obs.last().map(|o| o.w)
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.obs.iter().map(Observation::delta_f64).collect()
    }

    /// Crude expert judgments in sorted order. Open claims without a
    /// judgment count as `eta = 0`; a closed claim without one is an error.
    pub fn judgments(&self) -> Result<Vec<f64>> {
        self.obs
            .iter()
            .enumerate()
            .map(|(i, o)| match (o.eta, o.delta) {
                (Some(e), _) => Ok(e),
                (None, false) => Ok(0.0),
                (None, true) => Err(Error::Configuration(format!(
                    "closed observation {} has no expert judgment (eta)",
                    self.original_index[i]
                ))),
            })
            .collect()
    }

    pub fn has_judgments(&self) -> bool {
        self.obs.iter().all(|o| o.eta.is_some() || !o.delta)
    }

    /// Empirical `p`-quantile of `W` (smallest `W` with `H(W) >= p`).
    pub fn quantile(&self, p: f64) -> Option<f64> {
        if self.obs.is_empty() || !(0.0..=1.0).contains(&p) {
            return None;
        }
        let n = self.obs.len();
        let k = ((p * n as f64).ceil() as usize).clamp(1, n);
        Some(self.obs[k - 1].w)
    }
}

pub(crate) fn check_weights(sample: &SortedSample, weights: &[f64]) -> Result<()> {
    if weights.len() != sample.len() {
        return Err(Error::Validation(format!(
            "expected {} weights, got {}",
            sample.len(),
            weights.len()
        )));
    }
    for (i, w) in weights.iter().enumerate() {
        if !(0.0..=1.0).contains(w) {
            return Err(Error::obs(
                sample.original_index(i),
                format!("weight must lie in [0, 1], got {w}"),
            ));
        }
    }
    Ok(())
}

/// Empirical distribution function of `W`: `H(t) = #{W_i <= t} / n`.
pub fn ecdf(sample: &SortedSample) -> Result<StepCurve> {
    if sample.is_empty() {
        return Err(Error::Validation("empirical CDF of an empty sample".into()));
    }
    let n = sample.len() as f64;
    let points = sample
        .observations()
        .iter()
        .enumerate()
        .map(|(i, o)| (o.w, (i + 1) as f64 / n));
    Ok(StepCurve::from_sorted_values(0.0, points))
}

/// Weighted sub-distribution `(1/n) Σ 1{W_i <= t} weight_i`.
///
/// With `delta` as weights this is `H_1`; with crude judgments it is the
/// judgment-weighted analogue.
pub fn sub_ecdf(sample: &SortedSample, weights: &[f64]) -> Result<StepCurve> {
    if sample.is_empty() {
        return Err(Error::Validation("sub-distribution of an empty sample".into()));
    }
    check_weights(sample, weights)?;
    let n = sample.len() as f64;
    let mut acc = 0.0;
    let points: Vec<(f64, f64)> = sample
        .observations()
        .iter()
        .zip(weights)
        .map(|(o, w)| {
            acc += w;
            (o.w, acc / n)
        })
        .collect();
    Ok(StepCurve::from_sorted_values(0.0, points))
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn sample_strategy() -> impl Strategy<Value = Vec<(f64, bool, f64)>> {
        prop::collection::vec((0u32..20, any::<bool>(), 0.0f64..=1.0), 1..40)
            .prop_map(|v| v.into_iter().map(|(w, d, e)| (w as f64 * 0.5, d, e)).collect())
    }

    proptest! {
        #[test]
        fn ecdf_equals_unit_weight_sub_ecdf(raw in sample_strategy()) {
            let obs: Vec<_> = raw.iter().map(|&(w, d, _)| Observation::new(w, d)).collect();
            let s = sort_sample(&obs, TieOrder::EventFirst).unwrap();
            let h = ecdf(&s).unwrap();
            let hw = sub_ecdf(&s, &vec![1.0; s.len()]).unwrap();
            for t in (0..25).map(|k| k as f64 * 0.5 - 0.25) {
                prop_assert_eq!(h.evaluate(t), hw.evaluate(t));
                prop_assert_eq!(h.left_limit(t), hw.left_limit(t));
            }
        }

        #[test]
        fn weighted_sub_ecdf_is_dominated(raw in sample_strategy()) {
            let obs: Vec<_> = raw.iter().map(|&(w, d, _)| Observation::new(w, d)).collect();
            let s = sort_sample(&obs, TieOrder::EventFirst).unwrap();
            let weights: Vec<f64> = raw.iter().map(|r| r.2).collect();
            let h = ecdf(&s).unwrap();
            let h1 = sub_ecdf(&s, &weights).unwrap();
            for &t in s.w_values().iter() {
                prop_assert!(h1.evaluate(t) <= h.evaluate(t));
                prop_assert!(h.left_limit(t) <= h.evaluate(t));
            }
        }

        #[test]
        fn sorting_is_a_permutation(raw in sample_strategy()) {
            let obs: Vec<_> = raw.iter().map(|&(w, d, _)| Observation::new(w, d)).collect();
            let s = sort_sample(&obs, TieOrder::CensorFirst).unwrap();
            let mut before: Vec<(u64, bool)> = obs.iter().map(|o| (o.w.to_bits(), o.delta)).collect();
            let mut after: Vec<(u64, bool)> = s.observations().iter().map(|o| (o.w.to_bits(), o.delta)).collect();
            before.sort();
            after.sort();
            prop_assert_eq!(before, after);
            prop_assert!(s.w_values().windows(2).all(|w| w[0] <= w[1]));
            for (i, o) in s.observations().iter().enumerate() {
                prop_assert_eq!(*o, obs[s.original_index(i)]);
            }
        }
    }
}
