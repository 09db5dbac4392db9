//! The smoothing MSE `J(S) = tr[(L + U_S)⁻¹]` and the normalized score
//! `f(S) = J(∅) - J(S)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spd_trace_inverse;
use crate::model::{SensorSet, StackedModel};

/// Slack below zero tolerated on marginal gains before it counts as a bug.
pub const GAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreValue {
    /// MSE `J(S)`.
    pub j: f64,
    /// `f(S) = J(∅) - J(S)`.
    pub f: f64,
}

/// `U_S = Σ_{i ∈ S} U_i`.
pub fn info_sum(stacked: &StackedModel, s: &SensorSet) -> DMatrix<f64> {
    let dim = stacked.dim();
    let mut acc = DMatrix::zeros(dim, dim);
    for i in s.iter() {
        acc += stacked.sensor_info(i);
    }
    acc
}

/// `J` and `f` for the information matrix `U_S` already summed.
pub fn score_from_info(stacked: &StackedModel, info: &DMatrix<f64>) -> Result<ScoreValue> {
    let j = spd_trace_inverse(&(stacked.l() + info), "L + U_S")?;
    Ok(ScoreValue {
        j,
        f: stacked.j_empty() - j,
    })
}

pub fn mse(stacked: &StackedModel, s: &SensorSet) -> Result<ScoreValue> {
    stacked.check_set(s)?;
    if s.is_empty() {
        return Ok(ScoreValue {
            j: stacked.j_empty(),
            f: 0.0,
        });
    }
    score_from_info(stacked, &info_sum(stacked, s))
}

/// Applies the reporting rule for gains: tiny negatives become 0, larger ones are errors.
pub fn clamp_gain(gain: f64) -> Result<f64> {
    if gain >= 0.0 {
        Ok(gain)
    } else if gain >= -GAIN_SLACK {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!(
            "marginal gain {gain:e} is negative beyond round-off"
        )))
    }
}

/// `ρ_Ω(S) = f(S ∪ Ω) - f(S)`.
pub fn marginal_gain(stacked: &StackedModel, s: &SensorSet, omega: &SensorSet) -> Result<f64> {
    stacked.check_set(omega)?;
    if omega.is_subset(s) {
        return Ok(0.0);
    }
    let after = mse(stacked, &s.union(omega))?;
    let before = mse(stacked, s)?;
    clamp_gain(after.f - before.f)
}
