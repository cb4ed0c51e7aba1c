//! Right-continuous step functions.
//!
//! Every empirical distribution or hazard estimate in this crate is a
//! [`StepCurve`]: a value on `[0, first jump)` followed by the value taken
//! after each jump. Lookups are binary searches over the jump times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCurve {
    jump_times: Vec<f64>,
    values: Vec<f64>,
    initial_value: f64,
}

impl StepCurve {
    pub fn new(jump_times: Vec<f64>, values: Vec<f64>, initial_value: f64) -> Result<Self> {
        if jump_times.len() != values.len() {
            return Err(Error::Validation(format!(
                "step curve has {} jump times but {} values",
                jump_times.len(),
                values.len()
            )));
        }
        if jump_times.iter().any(|t| t.is_nan()) {
            return Err(Error::Validation("step curve jump time is NaN".into()));
        }
        if jump_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "step curve jump times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            jump_times,
            values,
            initial_value,
        })
    }

    /// Constant curve without jumps.
    pub fn constant(value: f64) -> Self {
        Self {
            jump_times: Vec::new(),
            values: Vec::new(),
            initial_value: value,
        }
    }

    /// Builds the curve from `(time, value after time)` pairs given in
    /// nondecreasing time order. Repeated times keep the last value and
    /// points that do not change the running value are dropped.
    pub(crate) fn from_sorted_values(
        initial_value: f64,
        points: impl IntoIterator<Item = (f64, f64)>,
    ) -> Self {
        let mut jump_times: Vec<f64> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        for (t, v) in points {
            if let Some(last_t) = jump_times.last() {
                debug_assert!(t >= *last_t);
                if t == *last_t {
                    *values.last_mut().unwrap() = v;
                    continue;
                }
            }
            jump_times.push(t);
            values.push(v);
        }
        // Drop flat "jumps" so only genuine discontinuities remain.
        let mut prev = initial_value;
        let mut keep_t = Vec::with_capacity(jump_times.len());
        let mut keep_v = Vec::with_capacity(values.len());
        for (t, v) in jump_times.into_iter().zip(values) {
            if v != prev {
                keep_t.push(t);
                keep_v.push(v);
                prev = v;
            }
        }
        Self {
            jump_times: keep_t,
            values: keep_v,
            initial_value,
        }
    }

    /// Builds a cumulative curve from `(time, increment)` pairs in any order.
    /// Increments are summed in ascending time order (stable for ties).
    pub(crate) fn from_increments(mut increments: Vec<(f64, f64)>) -> Self {
        increments.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let points: Vec<(f64, f64)> = increments
            .into_iter()
            .filter(|(t, _)| t.is_finite())
            .map(|(t, inc)| {
                acc += inc;
                (t, acc)
            })
            .collect();
        Self::from_sorted_values(0.0, points)
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    pub fn is_empty(&self) -> bool {
        self.jump_times.is_empty()
    }

    /// Value at `t` (right-continuous).
    pub fn evaluate(&self, t: f64) -> f64 {
        let idx = self.jump_times.partition_point(|&s| s <= t);
        if idx == 0 {
            self.initial_value
        } else {
            self.values[idx - 1]
        }
    }

    /// Value just before `t`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let idx = self.jump_times.partition_point(|&s| s < t);
        if idx == 0 {
            self.initial_value
        } else {
            self.values[idx - 1]
        }
    }

    /// Value after the last jump.
    pub fn terminal_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.initial_value)
    }

    pub fn is_nondecreasing(&self) -> bool {
        let mut prev = self.initial_value;
        self.values.iter().all(|&v| {
            let ok = v >= prev;
            prev = v;
            ok
        })
    }

    /// Checks the distribution-function invariants: nondecreasing with all
    /// values in `[0, 1]`.
    pub fn is_distribution(&self) -> bool {
        self.initial_value >= 0.0
            && self.is_nondecreasing()
            && self.values.iter().all(|v| (0.0..=1.0).contains(v))
            && self.initial_value <= 1.0
    }

    pub fn evaluate_many(&self, ts: &[f64]) -> Vec<f64> {
        ts.iter().map(|&t| self.evaluate(t)).collect()
    }
}
