//! Noise-strength schedules `σ(ε)`.

use crate::math;
use crate::{Error, Result};
use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum NoiseSchedule {
    /// `σ(ε) = σ₀`.
    Constant { sigma0: f64 },
    /// `σ(ε) = λ/√log(1/ε)`, so that `σ² log(1/ε) = λ²`.
    Critical { lambda: f64 },
    /// `σ(ε) = ε^τ`.
    Power { tau: f64 },
}

impl NoiseSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSchedule::Constant { sigma0 } if !(sigma0 >= 0.0) || !sigma0.is_finite() => {
                Err(Error::invalid("sigma0", "must be finite and ≥ 0"))
            }
            NoiseSchedule::Critical { lambda } if !(lambda >= 0.0) || !lambda.is_finite() => {
                Err(Error::invalid("lambda", "must be finite and ≥ 0"))
            }
            NoiseSchedule::Power { tau } if !(tau > 0.0) || !tau.is_finite() => {
                Err(Error::invalid("tau", "must be finite and > 0"))
            }
            _ => Ok(()),
        }
    }

    pub fn sigma(&self, epsilon: f64) -> f64 {
        match *self {
            NoiseSchedule::Constant { sigma0 } => sigma0,
            NoiseSchedule::Critical { lambda } => lambda / math::sqrt(math::ln(1.0 / epsilon)),
            NoiseSchedule::Power { tau } => math::pow(epsilon, tau),
        }
    }

    /// `lim σ²(ε) log(1/ε)`; `None` stands for `+∞`.
    pub fn lambda_sq(&self) -> Option<f64> {
        match *self {
            NoiseSchedule::Constant { sigma0 } if sigma0 > 0.0 => None,
            NoiseSchedule::Constant { .. } => Some(0.0),
            NoiseSchedule::Critical { lambda } => Some(lambda * lambda),
            NoiseSchedule::Power { .. } => Some(0.0),
        }
    }
}

/// `3λ²/(8π) − 1`, the net linear damping of the limit equation.
pub fn damping_coefficient(lambda_sq: f64) -> f64 {
    3.0 * lambda_sq / (8.0 * PI) - 1.0
}

/// `a_λ = 1 − 3λ²/(8π)`, the linear growth rate of the limit equation.
pub fn limit_growth_rate(lambda_sq: f64) -> f64 {
    -damping_coefficient(lambda_sq)
}

/// `lim_{ε→0} D_ε²` of the mass-one free field when `σ²(ε) log(1/ε) → λ²`.
/// With `E|ẑ_k|² = σ²/(2(1 + |k|²))` the lattice sum grows like
/// `2π log(1/ε)`, so the limit is `λ²/(4π)`.
pub fn limit_wick_variance(lambda_sq: f64) -> f64 {
    lambda_sq / (4.0 * PI)
}

/// Parameter `λ̃²` of the limit equation `∂_t w = Δw + (1 − 3λ̃²/8π) w − w³`
/// reached by the regularised dynamics under a schedule with
/// `σ² log(1/ε) → λ²`: the damping is `3 lim D_ε²`, so `λ̃² = 8π lim D_ε²`.
pub fn limit_equation_lambda_sq(lambda_sq: f64) -> f64 {
    8.0 * PI * limit_wick_variance(lambda_sq)
}
