//! Simulated contaminated claims: cause-specific hazards for the true event
//! `X` and the contamination `Y`, uniform censoring, and generators for
//! crude and sophisticated expert information.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the seed and a
//! purpose tag, with one stream per observation, so generation does not
//! depend on the order in which observations are produced.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::BeliefKernel;
use crate::sample::Observation;

const TAG_TIMES: u64 = 0x7469_6d65;
const TAG_CRUDE: u64 = 0x6372_7564;
const TAG_SOPH: u64 = 0x736f_7068;
const TAG_DATASET: u64 = 0x6461_7461;

const INVERSION_TOL: f64 = 1e-12;
const POSITIVITY_GRID: usize = 10_000;

/// Hazard rates `μ(t) = e^{a - b t}` for exit from the open state and
/// `μ02(t) = w1 e^{a - b t} + w2 e^{a - c t}` for the contaminating exit;
/// the event hazard is `μ01 = μ - μ02`. Censoring is uniform on
/// `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HazardSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub w1: f64,
    pub w2: f64,
    pub horizon: f64,
}

impl Default for HazardSpec {
    fn default() -> Self {
        Self { a: 0.1, b: 1.5, c: 2.5, w1: 0.125, w2: 0.25, horizon: 20.0 }
    }
}

/// `∫_0^t e^{a - r s} ds`, with `t = ∞` allowed.
fn exp_integral(a: f64, r: f64, t: f64) -> f64 {
    a.exp() * -(-r * t).exp_m1() / r
}

impl HazardSpec {
    /// Same total hazard with no contamination.
    pub fn without_contamination(mut self) -> Self {
        self.w1 = 0.0;
        self.w2 = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.w1, self.w2, self.horizon];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Configuration(format!("hazard parameters must be finite: {self:?}")));
        }
        if !(self.b > 0.0 && self.c > 0.0) {
            return Err(Error::Configuration(format!(
                "hazard decay rates must be positive, got b = {}, c = {}",
                self.b, self.c
            )));
        }
        if self.w1 < 0.0 || self.w2 < 0.0 {
            return Err(Error::Configuration("contamination weights must be non-negative".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::Configuration(format!("horizon must be positive, got {}", self.horizon)));
        }
        for j in 0..=POSITIVITY_GRID {
            let t = self.horizon * j as f64 / POSITIVITY_GRID as f64;
            if !(self.event_rate(t) > 0.0) {
                return Err(Error::Configuration(format!(
                    "event hazard must stay positive on [0, horizon], but equals {} at t = {t}",
                    self.event_rate(t)
                )));
            }
        }
        Ok(())
    }

    pub fn total_rate(&self, t: f64) -> f64 {
        (self.a - self.b * t).exp()
    }

    pub fn contaminant_rate(&self, t: f64) -> f64 {
        self.w1 * (self.a - self.b * t).exp() + self.w2 * (self.a - self.c * t).exp()
    }

    pub fn event_rate(&self, t: f64) -> f64 {
        (1.0 - self.w1) * (self.a - self.b * t).exp() - self.w2 * (self.a - self.c * t).exp()
    }

    pub fn cumulative_total(&self, t: f64) -> f64 {
        exp_integral(self.a, self.b, t)
    }

    pub fn cumulative_contaminant(&self, t: f64) -> f64 {
        self.w1 * exp_integral(self.a, self.b, t) + self.w2 * exp_integral(self.a, self.c, t)
    }

    pub fn cumulative_event(&self, t: f64) -> f64 {
        (1.0 - self.w1) * exp_integral(self.a, self.b, t) - self.w2 * exp_integral(self.a, self.c, t)
    }

    /// True (improper) distribution function of the event time `X`.
    pub fn event_cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        -(-self.cumulative_event(t)).exp_m1()
    }

    /// Distribution function of `X ∧ Y`.
    pub fn first_exit_cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        -(-self.cumulative_total(t)).exp_m1()
    }

    /// Probability that a closed observation at `w` is truly closed,
    /// `μ01(w) / (μ01(w) + μ02(w))`.
    pub fn mark_function(&self, w: f64) -> f64 {
        let e = self.event_rate(w);
        e / (e + self.contaminant_rate(w))
    }

    /// Success probability of the crude expert's Bernoulli draw at `w`:
    /// `p0 p(w) + 1 - p0`.
    pub fn expert_mark(&self, p0: f64, w: f64) -> f64 {
        p0 * self.mark_function(w) + (1.0 - p0)
    }
}

/// Solves `Λ(t) = e` for a continuous nondecreasing `Λ` with `Λ(0) = 0`;
/// returns `+∞` when `e` exceeds the total mass `Λ(∞)`.
fn invert_cumulative<L: Fn(f64) -> f64>(lambda: L, e: f64) -> f64 {
    if e >= lambda(f64::INFINITY) {
        return f64::INFINITY;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while lambda(hi) < e {
        lo = hi;
        hi *= 2.0;
        if hi > 1e18 {
            return f64::INFINITY;
        }
    }
    while hi - lo > INVERSION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lambda(mid) < e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn stream(seed: u64, tag: u64, index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index as u64);
    rng
}

/// Shape/rate pairs of the Gamma laws for the location noise `V1` and the
/// scale noise `V2` of simulated sophisticated experts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaNoise {
    pub mean_shape: f64,
    pub mean_rate: f64,
    pub sd_shape: f64,
    pub sd_rate: f64,
}

impl GammaNoise {
    /// `V1 ~ Γ(1, 1)`, `V2 ~ Γ(1, 10)`.
    pub const EXPERT_1: GammaNoise = GammaNoise { mean_shape: 1.0, mean_rate: 1.0, sd_shape: 1.0, sd_rate: 10.0 };
    /// `V1 ~ Γ(10, 10)`, `V2 ~ Γ(1, 100)`.
    pub const EXPERT_2: GammaNoise = GammaNoise { mean_shape: 10.0, mean_rate: 10.0, sd_shape: 1.0, sd_rate: 100.0 };

    fn laws(&self) -> Result<(Gamma<f64>, Gamma<f64>)> {
        let make = |shape: f64, rate: f64| {
            if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
                return Err(Error::Configuration(format!(
                    "Gamma noise needs positive finite shape and rate, got ({shape}, {rate})"
                )));
            }
            Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Configuration(e.to_string()))
        };
        Ok((make(self.mean_shape, self.mean_rate)?, make(self.sd_shape, self.sd_rate)?))
    }
}

fn default_spread() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub hazards: HazardSpec,
    pub n: usize,
    pub seed: u64,
    /// Crude expert effectiveness `p0`.
    #[serde(default)]
    pub crude_effectiveness: Option<f64>,
    #[serde(default)]
    pub soph_noise: Option<GammaNoise>,
    /// Multiplier on the sophisticated expert's noise: kernel location
    /// `X + f V1`, scale `f (X + V2)`.
    #[serde(default = "default_spread")]
    pub soph_spread: f64,
}

impl ScenarioConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            hazards: HazardSpec::default(),
            n,
            seed,
            crude_effectiveness: None,
            soph_noise: None,
            soph_spread: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hazards.validate()?;
        if self.n == 0 {
            return Err(Error::Configuration("n must be at least 1".into()));
        }
        if self.crude_effectiveness.is_some() && self.soph_noise.is_some() {
            return Err(Error::Configuration(
                "a generated dataset carries one expert scheme: set either the crude effectiveness or the sophisticated noise".into(),
            ));
        }
        if let Some(p0) = self.crude_effectiveness {
            check_probability("crude effectiveness", p0)?;
        }
        if let Some(noise) = self.soph_noise {
            noise.laws()?;
        }
        if !(self.soph_spread > 0.0 && self.soph_spread.is_finite()) {
            return Err(Error::Configuration(format!("spread must be positive, got {}", self.soph_spread)));
        }
        Ok(())
    }
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Configuration(format!("{what} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn draw_observation(h: &HazardSpec, seed: u64, index: usize) -> Observation {
    let mut rng = stream(seed, TAG_TIMES, index);
    let ex: f64 = Exp1.sample(&mut rng);
    let ey: f64 = Exp1.sample(&mut rng);
    let u: f64 = rng.random();
    let x = invert_cumulative(|t| h.cumulative_event(t), ex);
    let y = invert_cumulative(|t| h.cumulative_contaminant(t), ey);
    Observation::from_truth(x, y, u * h.horizon)
}

/// Draws `n` observations with hidden `(X, Y, C)` by inverting the
/// closed-form cumulative hazards.
pub fn sample_event_times(cfg: &ScenarioConfig) -> Result<Vec<Observation>> {
    cfg.validate()?;
    Ok((0..cfg.n).map(|i| draw_observation(&cfg.hazards, cfg.seed, i)).collect())
}

/// Crude expert judgments `η_k = δ_k B_k`, `B_k ~ Bernoulli(p0 p(W_k) + 1 - p0)`.
pub fn crude_expert_scenario(obs: &[Observation], h: &HazardSpec, p0: f64, seed: u64) -> Result<Vec<f64>> {
    check_probability("crude effectiveness", p0)?;
    Ok(obs
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let u: f64 = stream(seed, TAG_CRUDE, i).random();
            if o.delta && u < h.expert_mark(p0, o.w) {
                1.0
            } else {
                0.0
            }
        })
        .collect())
}

/// The perfect crude expert: `η = 1{W = X}`.
pub fn perfect_judgments(obs: &[Observation]) -> Result<Vec<f64>> {
    obs.iter()
        .enumerate()
        .map(|(i, o)| {
            let x = o.x_true.ok_or_else(|| Error::obs(i, "x_true is required for perfect judgments"))?;
            Ok(if o.delta && o.w == x { 1.0 } else { 0.0 })
        })
        .collect()
}

/// Truncated Gaussian beliefs on `[W_k, ∞)` around the hidden event time,
/// with location `X_k + f V1` and scale `f (X_k + V2)` for closed claims.
/// A closed claim whose event never happens (`X_k = ∞`) gets an atom at
/// infinity.
pub fn sophisticated_expert_scenario(
    obs: &[Observation],
    noise: &GammaNoise,
    spread: f64,
    seed: u64,
) -> Result<Vec<Option<BeliefKernel>>> {
    let (v1_law, v2_law) = noise.laws()?;
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::Configuration(format!("spread must be positive, got {spread}")));
    }
    obs.iter()
        .enumerate()
        .map(|(i, o)| {
            if !o.delta {
                return Ok(None);
            }
            let x = o.x_true.ok_or_else(|| Error::obs(i, "x_true is required for sophisticated beliefs"))?;
            let mut rng = stream(seed, TAG_SOPH, i);
            let v1 = v1_law.sample(&mut rng);
            let v2 = v2_law.sample(&mut rng);
            if x.is_infinite() {
                return BeliefKernel::dirac(o.w, f64::INFINITY).map(Some);
            }
            BeliefKernel::truncated_gaussian(o.w, x + spread * v1, spread * (x + v2))
                .map(Some)
                .map_err(|e| Error::obs(i, format!("cannot build belief kernel: {e}")))
        })
        .collect()
}

/// Expert constructions for data without hidden truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum DatasetScheme {
    /// Each closed claim is reopened with probability `q`.
    UniformReopen { q: f64 },
    /// Closed claims above the empirical `1 - fraction` quantile of `W` are
    /// kept closed with probability `keep`.
    TopQuantileReopen { fraction: f64, keep: f64 },
    /// Truncated Gaussian beliefs with location `m_mult W` and scale
    /// `sd_a + sd_b W`.
    ProportionalKernel { m_mult: f64, sd_a: f64, sd_b: f64 },
    /// As above above the `1 - fraction` quantile, a point mass at `W`
    /// elsewhere.
    TopQuantileKernel { fraction: f64, m_mult: f64, sd_a: f64, sd_b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpertInfo {
    Judgments(Vec<f64>),
    Beliefs(Vec<Option<BeliefKernel>>),
}

/// Smallest observed `W` whose empirical distribution reaches `p`.
pub fn empirical_quantile(obs: &[Observation], p: f64) -> Result<f64> {
    if obs.is_empty() {
        return Err(Error::Validation("empirical quantile of an empty sample".into()));
    }
    let mut w: Vec<f64> = obs.iter().map(|o| o.w).collect();
    w.sort_by(f64::total_cmp);
    let k = ((p * w.len() as f64).ceil() as usize).clamp(1, w.len());
    Ok(w[k - 1])
}

fn quantile_threshold(obs: &[Observation], fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Validation(format!("quantile fraction must lie in (0, 1), got {fraction}")));
    }
    empirical_quantile(obs, 1.0 - fraction)
}

fn proportional_kernel(o: &Observation, i: usize, m_mult: f64, sd_a: f64, sd_b: f64) -> Result<BeliefKernel> {
    BeliefKernel::truncated_gaussian(o.w, m_mult * o.w, sd_a + sd_b * o.w)
        .map_err(|e| Error::obs(i, format!("cannot build belief kernel: {e}")))
}

pub fn dataset_expert_scenario(obs: &[Observation], scheme: &DatasetScheme, seed: u64) -> Result<ExpertInfo> {
    let draw = |i: usize| -> f64 { stream(seed, TAG_DATASET, i).random() };
    match *scheme {
        DatasetScheme::UniformReopen { q } => {
            check_probability("reopen probability", q)?;
            Ok(ExpertInfo::Judgments(
                obs.iter()
                    .enumerate()
                    .map(|(i, o)| if o.delta && draw(i) >= q { 1.0 } else { 0.0 })
                    .collect(),
            ))
        }
        DatasetScheme::TopQuantileReopen { fraction, keep } => {
            check_probability("keep probability", keep)?;
            let threshold = quantile_threshold(obs, fraction)?;
            Ok(ExpertInfo::Judgments(
                obs.iter()
                    .enumerate()
                    .map(|(i, o)| {
                        let kept = o.w <= threshold || draw(i) < keep;
                        if o.delta && kept {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            ))
        }
        DatasetScheme::ProportionalKernel { m_mult, sd_a, sd_b } => obs
            .iter()
            .enumerate()
            .map(|(i, o)| o.delta.then(|| proportional_kernel(o, i, m_mult, sd_a, sd_b)).transpose())
            .collect::<Result<_>>()
            .map(ExpertInfo::Beliefs),
        DatasetScheme::TopQuantileKernel { fraction, m_mult, sd_a, sd_b } => {
            let threshold = quantile_threshold(obs, fraction)?;
            obs.iter()
                .enumerate()
                .map(|(i, o)| {
                    if !o.delta {
                        Ok(None)
                    } else if o.w > threshold {
                        proportional_kernel(o, i, m_mult, sd_a, sd_b).map(Some)
                    } else {
                        BeliefKernel::dirac_at(o.w).map(Some)
                    }
                })
                .collect::<Result<_>>()
                .map(ExpertInfo::Beliefs)
        }
    }
}

/// A simulated dataset with whichever expert the configuration asks for.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    /// Carries `eta` when a crude expert was simulated.
    pub observations: Vec<Observation>,
    pub beliefs: Option<Vec<Option<BeliefKernel>>>,
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<SimulatedDataset> {
    let mut observations = sample_event_times(cfg)?;
    if let Some(p0) = cfg.crude_effectiveness {
        let eta = crude_expert_scenario(&observations, &cfg.hazards, p0, cfg.seed)?;
        for (o, e) in observations.iter_mut().zip(eta) {
            o.eta = Some(e);
        }
    }
    let beliefs = match cfg.soph_noise {
        Some(noise) => Some(sophisticated_expert_scenario(&observations, &noise, cfg.soph_spread, cfg.seed)?),
        None => None,
    };
    Ok(SimulatedDataset { observations, beliefs })
}

/// Fraction of all observations that are closed by contamination
/// (`δ = 1` and `Y < X`). `None` without hidden truth.
pub fn contamination_fraction(obs: &[Observation]) -> Option<f64> {
    let mut count = 0usize;
    for o in obs {
        if o.is_contaminated()? {
            count += 1;
        }
    }
    Some(count as f64 / obs.len() as f64)
}

/// Fraction of closed observations that are closed by contamination.
pub fn contamination_among_closed(obs: &[Observation]) -> Option<f64> {
    let mut count = 0usize;
    let mut closed = 0usize;
    for o in obs {
        if o.is_contaminated()? {
            count += 1;
        }
        closed += o.delta as usize;
    }
    (closed > 0).then(|| count as f64 / closed as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_hazards() {
        let h = HazardSpec::default();
        h.validate().unwrap();
        assert!((h.mark_function(0.0) - 0.625).abs() < 1e-15);
        assert!((h.expert_mark(0.75, 0.0) - 0.71875).abs() < 1e-15);
        assert_eq!(h.expert_mark(0.0, 3.0), 1.0);
        for j in 0..=200 {
            let p = h.mark_function(j as f64 * 0.1);
            assert!(p > 0.0 && p < 1.0);
        }
        assert_eq!(h.without_contamination().mark_function(4.0), 1.0);
        let total_mass = 0.1f64.exp() / 1.5;
        assert!((h.cumulative_total(f64::INFINITY) - total_mass).abs() < 1e-15);
        assert!(((-total_mass).exp() - 0.4787).abs() < 1e-4);
    }

    #[test]
    fn cumulative_hazards_match_quadrature() {
        let h = HazardSpec::default();
        for t in [0.1, 0.7, 2.0, 9.0] {
            let q = crate::quadrature::integrate(|s| h.event_rate(s), 0.0, t, 1e-14, 0.0).unwrap().value;
            assert!((q - h.cumulative_event(t)).abs() < 1e-13);
            let q = crate::quadrature::integrate(|s| h.contaminant_rate(s), 0.0, t, 1e-14, 0.0).unwrap().value;
            assert!((q - h.cumulative_contaminant(t)).abs() < 1e-13);
        }
        let sum = h.cumulative_event(3.0) + h.cumulative_contaminant(3.0);
        assert!((sum - h.cumulative_total(3.0)).abs() < 1e-14);
    }

    #[test]
    fn invalid_hazards_are_rejected() {
        let bad = HazardSpec { w1: 0.9, w2: 0.5, ..HazardSpec::default() };
        assert!(bad.validate().is_err());
        assert!(HazardSpec { b: 0.0, ..HazardSpec::default() }.validate().is_err());
        assert!(HazardSpec { horizon: -1.0, ..HazardSpec::default() }.validate().is_err());
    }

    #[test]
    fn inversion_hits_target_or_infinity() {
        let h = HazardSpec::default();
        let lambda = |t: f64| h.cumulative_event(t);
        for e in [1e-6, 0.01, 0.3, 0.5] {
            let t = invert_cumulative(lambda, e);
            assert!((lambda(t) - e).abs() < 1e-11, "e = {e}");
        }
        assert_eq!(invert_cumulative(lambda, 0.6), f64::INFINITY);
    }

    #[test]
    fn generation_is_reproducible_and_order_independent() {
        let cfg = ScenarioConfig { crude_effectiveness: Some(0.75), ..ScenarioConfig::new(300, 9) };
        let a = simulate(&cfg).unwrap();
        assert_eq!(a, simulate(&cfg).unwrap());
        let reversed: Vec<_> = (0..cfg.n).rev().map(|i| draw_observation(&cfg.hazards, cfg.seed, i)).collect();
        for (i, o) in reversed.iter().rev().enumerate() {
            assert_eq!(o.w, a.observations[i].w);
            assert_eq!(o.x_true, a.observations[i].x_true);
        }
        let other = simulate(&ScenarioConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a.observations, other.observations);
        for (i, o) in a.observations.iter().enumerate() {
            o.validate(i).unwrap();
        }
    }

    #[test]
    fn no_contamination_without_contaminant_hazard() {
        let cfg = ScenarioConfig { hazards: HazardSpec::default().without_contamination(), ..ScenarioConfig::new(2000, 3) };
        let obs = sample_event_times(&cfg).unwrap();
        assert_eq!(contamination_fraction(&obs), Some(0.0));
        assert!(obs.iter().all(|o| o.y_true == Some(f64::INFINITY)));
    }

    #[test]
    fn crude_expert_edge_cases() {
        let h = HazardSpec::default();
        let obs = sample_event_times(&ScenarioConfig::new(500, 4)).unwrap();
        let eta = crude_expert_scenario(&obs, &h, 0.0, 4).unwrap();
        assert!(obs.iter().zip(&eta).all(|(o, e)| *e == o.delta_f64()));
        assert!(crude_expert_scenario(&obs, &h, 1.5, 4).is_err());
        let perfect = perfect_judgments(&obs).unwrap();
        for (o, e) in obs.iter().zip(&perfect) {
            assert_eq!(*e == 1.0, o.delta && !o.is_contaminated().unwrap());
        }
    }

    #[test]
    fn sophisticated_kernels_respect_lower_bound() {
        let obs = sample_event_times(&ScenarioConfig::new(400, 5)).unwrap();
        let beliefs = sophisticated_expert_scenario(&obs, &GammaNoise::EXPERT_2, 1.0, 5).unwrap();
        for (o, k) in obs.iter().zip(&beliefs) {
            assert_eq!(k.is_some(), o.delta);
            if let Some(k) = k {
                assert_eq!(k.lower(), o.w);
                assert_eq!(k.cdf(o.w - 1e-9), 0.0);
            }
        }
        let no_truth = [Observation::closed(1.0)];
        assert!(sophisticated_expert_scenario(&no_truth, &GammaNoise::EXPERT_1, 1.0, 1).is_err());
    }

    #[test]
    fn dataset_schemes() {
        let obs: Vec<_> = (1..=10).map(|i| Observation::closed(i as f64)).collect();
        match dataset_expert_scenario(&obs, &DatasetScheme::ProportionalKernel { m_mult: 1.05, sd_a: 0.1, sd_b: 0.5 }, 1)
            .unwrap()
        {
            ExpertInfo::Beliefs(b) => {
                let (m, s) = b[1].unwrap().params();
                assert!((m - 2.1).abs() < 1e-15 && (s.unwrap() - 1.1).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let scheme = DatasetScheme::TopQuantileKernel { fraction: 0.2, m_mult: 1.05, sd_a: 0.1, sd_b: 0.5 };
        match dataset_expert_scenario(&obs, &scheme, 1).unwrap() {
            ExpertInfo::Beliefs(b) => {
                let gaussians = b.iter().filter(|k| k.unwrap().kind() != crate::kernel::KernelKind::Dirac).count();
                assert_eq!(gaussians, 2);
            }
            other => panic!("{other:?}"),
        }
        let bad = DatasetScheme::TopQuantileReopen { fraction: 1.0, keep: 0.8 };
        assert!(dataset_expert_scenario(&obs, &bad, 1).is_err());
        match dataset_expert_scenario(&obs, &DatasetScheme::TopQuantileReopen { fraction: 0.3, keep: 0.0 }, 1).unwrap() {
            ExpertInfo::Judgments(eta) => assert_eq!(eta, [1., 1., 1., 1., 1., 1., 1., 0., 0., 0.]),
            other => panic!("{other:?}"),
        }
    }
}
