//! Two-variant proportion dynamics and odds algebra.
//!
//! With a constant per-period advantage `gamma`, the new-variant share evolves as
//!
//! ```text
//! lambda' = gamma * lambda / ((1 - lambda) + gamma * lambda)
//! ```
//!
//! which is the same as saying the odds `lambda / (1 - lambda)` grow by the
//! factor `gamma` each period, i.e. a logistic curve in `t`.

use serde::{Deserialize, Serialize};

use crate::data::ModelParams;
use crate::error::{Error, Result};

/// Generation period used when converting advantages to reproduction-number scale.
pub const DEFAULT_GENERATION_DAYS: f64 = 4.7;

/// Share of cases belonging to the emerging variant, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Proportion(f64);

impl Proportion {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Proportion(value))
        } else {
            Err(Error::InvalidArgument(format!("proportion {value} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Multiplicative per-period advantage of the new variant, tagged with the
/// period length (in days) it refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Advantage {
    pub value: f64,
    pub period_days: f64,
}

impl Advantage {
    pub fn new(value: f64, period_days: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidArgument(format!("advantage must be positive, got {value}")));
        }
        if !(period_days > 0.0) || !period_days.is_finite() {
            return Err(Error::NonPositivePeriod(period_days));
        }
        Ok(Advantage { value, period_days })
    }

    pub fn ln(self) -> f64 {
        self.value.ln()
    }
}

pub fn step_lambda(lambda: Proportion, gamma: Advantage) -> Proportion {
    let l = lambda.value();
    let g = gamma.value;
    let num = g * l;
    // Clamp guards the last ulp; the exact map never leaves [0, 1].
    Proportion((num / ((1.0 - l) + num)).clamp(0.0, 1.0))
}

/// Logistic proportion `1 / (1 + exp(-alpha - beta t))`.
pub fn lambda_at(params: &ModelParams, t: f64) -> Proportion {
    Proportion(logistic(params.eta(t)))
}

pub(crate) fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
pub(crate) fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Odds `lambda / (1 - lambda)`; infinite odds at `lambda = 1` are an error.
pub fn odds(lambda: Proportion) -> Result<f64> {
    let l = lambda.value();
    if l >= 1.0 {
        return Err(Error::BoundaryOdds(l));
    }
    Ok(l / (1.0 - l))
}

pub fn log_odds(lambda: Proportion) -> Result<f64> {
    let l = lambda.value();
    if l <= 0.0 || l >= 1.0 {
        return Err(Error::BoundaryOdds(l));
    }
    Ok((l / (1.0 - l)).ln())
}

/// Inverse of [`log_odds`].
pub fn from_log_odds(log_odds: f64) -> Proportion {
    Proportion(logistic(log_odds))
}

/// Re-expresses `gamma` over `target_days` instead of its own period:
/// `exp((target_days / period_days) * ln gamma)`.
pub fn rescale_advantage(gamma: Advantage, target_days: f64) -> Result<Advantage> {
    if !(target_days > 0.0) || !target_days.is_finite() {
        return Err(Error::NonPositivePeriod(target_days));
    }
    let value = ((target_days / gamma.period_days) * gamma.ln()).exp();
    Ok(Advantage { value, period_days: target_days })
}
