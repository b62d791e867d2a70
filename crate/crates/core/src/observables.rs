//! Measured quantities: l1 coherence, relative coherence, well-transfer
//! probability and purity.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::grid::{mirror_sum, weighted_abs_integral, weighted_diagonal, DensityField, GridError, HalfAxis};

/// Below this the undamped coherence is solver noise and ratios are dropped.
pub const COHERENCE_FLOOR: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("time stamps differ at index {index}: {a} vs {b}")]
    MismatchedTimes { index: usize, a: f64, b: f64 },
    #[error("series lengths differ: {0} vs {1}")]
    MismatchedLengths(usize, usize),
    #[error("times must be strictly increasing (index {0})")]
    NonMonotonicTimes(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// `C = ∫₀^L dy ∫_{−L}^0 dx |ρ̃(x, y)|`, restricted to `|x|, |y| ≤ l_int`.
pub fn l1_coherence(field: &DensityField, l_int: f64) -> f64 {
    let grid = field.grid();
    let l = l_int.min(grid.half_width());
    let wx = grid.half_axis_weights(HalfAxis::Negative, l);
    let wy = grid.half_axis_weights(HalfAxis::Positive, l);
    weighted_abs_integral(field, &wx, &wy)
}

/// `P = ∫_{−L}^0 ρ̃(x, x) dx`.
pub fn left_probability(field: &DensityField) -> Result<f64, GridError> {
    let grid = field.grid();
    weighted_diagonal(field, &grid.half_axis_weights(HalfAxis::Negative, grid.half_width()))
}

/// `∫_0^L ρ̃(x, x) dx`.
pub fn right_probability(field: &DensityField) -> Result<f64, GridError> {
    let grid = field.grid();
    weighted_diagonal(field, &grid.half_axis_weights(HalfAxis::Positive, grid.half_width()))
}

/// `tr ρ² ≈ Σ_ij w_i w_j |ρ̃_ij|²` with trapezoid weights.
pub fn purity(field: &DensityField) -> f64 {
    let w = field.grid().trapezoid_weights();
    let v = field.values();
    mirror_sum(w.len(), |i| {
        let row = v.row(i);
        w[i] * mirror_sum(w.len(), |j| w[j] * row[j].norm_sqr())
    })
}

/// Hex digest identifying the parameter set that produced a series.
pub fn fingerprint<T: Serialize + ?Sized>(params: &T) -> String {
    let json = serde_json::to_vec(params).expect("parameters serialize");
    let digest = Sha256::digest(&json);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub params_fingerprint: String,
}

impl ObservableSeries {
    pub fn new(label: impl Into<String>, params_fingerprint: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            times: Vec::new(),
            values: Vec::new(),
            params_fingerprint: params_fingerprint.into(),
        }
    }

    pub fn push(&mut self, t: f64, value: f64) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        self.times.last().copied().zip(self.values.last().copied())
    }

    /// Value at the recorded time closest to `t`.
    pub fn value_near(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.values)
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|(_, &v)| v)
    }

    pub fn validate(&self) -> Result<(), ObservableError> {
        if self.times.len() != self.values.len() {
            return Err(ObservableError::MismatchedLengths(self.times.len(), self.values.len()));
        }
        if let Some(k) = self.times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(ObservableError::NonMonotonicTimes(k + 1));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeCoherence {
    pub series: ObservableSeries,
    /// First time at which the undamped coherence fell below
    /// [`COHERENCE_FLOOR`]; the ratio is not reported from there on.
    pub truncated_at: Option<f64>,
}

/// Pointwise `C_damped / C_undamped` on identical time stamps.
pub fn relative_coherence(
    damped: &ObservableSeries,
    undamped: &ObservableSeries,
) -> Result<RelativeCoherence, ObservableError> {
    damped.validate()?;
    undamped.validate()?;
    if damped.len() != undamped.len() {
        return Err(ObservableError::MismatchedLengths(damped.len(), undamped.len()));
    }
    for (index, (&a, &b)) in damped.times.iter().zip(&undamped.times).enumerate() {
        if a != b {
            return Err(ObservableError::MismatchedTimes { index, a, b });
        }
    }
    let mut series = ObservableSeries::new("C_R", damped.params_fingerprint.clone());
    let mut truncated_at = None;
    for ((&t, &c), &c0) in damped.times.iter().zip(&damped.values).zip(&undamped.values) {
        if c0 < COHERENCE_FLOOR {
            truncated_at = Some(t);
            break;
        }
        series.push(t, c / c0);
    }
    Ok(RelativeCoherence { series, truncated_at })
}
