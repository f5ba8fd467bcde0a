//! Fisher and HAC-sandwich covariance of the fitted parameters, and the
//! advantage confidence intervals derived from them.
//!
//! With per-period scores `s_t` and information `I = -sum_t h_t`:
//!
//! ```text
//! fisher:       Sigma = I^-1
//! sandwich(K):  Sigma = I^-1 J_K I^-1
//!               J_K   = sum_t s_t s_t' + sum_{j=1}^{K+1} k(j / (K+1)) sum_t (s_t s_{t+j}' + s_{t+j} s_t')
//! ```
//!
//! `k` is the Parzen kernel. Lags are measured in `t_index` units, so for a
//! series with gaps two rows `d` periods apart enter with weight `k(d / (K+1))`.
//! `K = 0` gives the heteroskedasticity-only sandwich.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::SurveillanceSeries;
use crate::dynamics::Advantage;
use crate::error::{Error, Result};
use crate::estimation::{hessian, score_contributions, FitResult};

/// Default HAC bandwidth.
pub const DEFAULT_BANDWIDTH: usize = 4;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VarianceKind {
    Fisher,
    Sandwich { bandwidth: usize },
}

impl std::fmt::Display for VarianceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VarianceKind::Fisher => f.write_str("fisher"),
            VarianceKind::Sandwich { bandwidth } => write!(f, "sandwich(K={bandwidth})"),
        }
    }
}

/// Covariance of a parameter estimate, together with the estimate it was computed at.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceEstimate {
    pub kind: VarianceKind,
    pub matrix: DMatrix<f64>,
    pub estimate: Vec<f64>,
}

impl VarianceEstimate {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn std_error(&self, i: usize) -> f64 {
        self.matrix[(i, i)].max(0.0).sqrt()
    }

    /// Variance of `alpha + beta * t` (two-parameter case).
    pub fn linear_predictor_variance(&self, t: f64) -> f64 {
        let m = &self.matrix;
        m[(0, 0)] + 2.0 * t * m[(0, 1)] + t * t * m[(1, 1)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn is_paired_with(&self, fit: &FitResult) -> bool {
        self.estimate.len() == 2 && self.estimate[0] == fit.params.alpha && self.estimate[1] == fit.params.beta
    }
}

/// Parzen kernel: `1 - 6x^2 + 6|x|^3` on `|x| <= 1/2`, `2(1-|x|)^3` on `1/2 < |x| <= 1`, else 0.
pub fn parzen(x: f64) -> f64 {
    let a = x.abs();
    if a <= 0.5 {
        1.0 - 6.0 * a * a + 6.0 * a * a * a
    } else if a <= 1.0 {
        2.0 * (1.0 - a).powi(3)
    } else {
        0.0
    }
}

/// `z` such that `±z` covers `level` of a standard normal. The conventional
/// 95% level uses exactly 1.96.
pub fn z_for_level(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence level {level} not in (0, 1)")));
    }
    if (level - 0.95).abs() < 1e-12 {
        return Ok(1.96);
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(n.inverse_cdf(0.5 + level / 2.0))
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Kernel-weighted outer-product matrix `J_K` from per-period score vectors
/// located at `t_index` values (sorted ascending).
pub fn hac_meat(t_index: &[i64], scores: &[Vec<f64>], bandwidth: usize) -> DMatrix<f64> {
    let p = scores.first().map_or(0, Vec::len);
    let mut j = DMatrix::<f64>::zeros(p, p);
    let span = (bandwidth + 1) as f64;
    for (a, sa) in scores.iter().enumerate() {
        for r in 0..p {
            for c in 0..p {
                j[(r, c)] += sa[r] * sa[c];
            }
        }
        for (b, sb) in scores.iter().enumerate().skip(a + 1) {
            let lag = t_index[b] - t_index[a];
            if lag as usize > bandwidth + 1 {
                break;
            }
            let w = parzen(lag as f64 / span);
            if w == 0.0 {
                continue;
            }
            for r in 0..p {
                for c in 0..p {
                    j[(r, c)] += w * (sa[r] * sb[c] + sb[r] * sa[c]);
                }
            }
        }
    }
    j
}

pub(crate) fn invert_information(info: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol =
        info.clone().cholesky().ok_or_else(|| Error::Singular("information matrix is not positive definite".into()))?;
    let mut inv = chol.inverse();
    symmetrize(&mut inv);
    Ok(inv)
}

pub(crate) fn sandwich(bread: &DMatrix<f64>, meat: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = bread * meat * bread;
    symmetrize(&mut m);
    m
}

fn information(series: &SurveillanceSeries, fit: &FitResult) -> DMatrix<f64> {
    let h = hessian(series, &fit.params);
    DMatrix::from_row_slice(2, 2, &[-h[0][0], -h[0][1], -h[1][0], -h[1][1]])
}

pub fn fisher_information(series: &SurveillanceSeries, fit: &FitResult) -> Result<VarianceEstimate> {
    let inv = invert_information(&information(series, fit))?;
    Ok(VarianceEstimate { kind: VarianceKind::Fisher, matrix: inv, estimate: vec![fit.params.alpha, fit.params.beta] })
}

pub fn hac_sandwich(series: &SurveillanceSeries, fit: &FitResult, bandwidth: usize) -> Result<VarianceEstimate> {
    if bandwidth >= series.len() {
        return Err(Error::BandwidthTooLarge { bandwidth, periods: series.len() });
    }
    let bread = invert_information(&information(series, fit))?;
    let t: Vec<i64> = series.t_values().collect();
    let scores: Vec<Vec<f64>> = score_contributions(series, &fit.params).into_iter().map(|s| s.to_vec()).collect();
    let meat = hac_meat(&t, &scores, bandwidth);
    Ok(VarianceEstimate {
        kind: VarianceKind::Sandwich { bandwidth },
        matrix: sandwich(&bread, &meat),
        estimate: vec![fit.params.alpha, fit.params.beta],
    })
}

/// Dispatches on `kind`.
pub fn variance(series: &SurveillanceSeries, fit: &FitResult, kind: VarianceKind) -> Result<VarianceEstimate> {
    match kind {
        VarianceKind::Fisher => fisher_information(series, fit),
        VarianceKind::Sandwich { bandwidth } => hac_sandwich(series, fit, bandwidth),
    }
}

/// Wald interval for one scalar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamInterval {
    pub estimate: f64,
    pub std_error: f64,
    pub low: f64,
    pub high: f64,
}

pub fn param_intervals(
    variance: &VarianceEstimate,
    fit: &FitResult,
    level: f64,
) -> Result<(ParamInterval, ParamInterval)> {
    let z = z_for_level(level)?;
    let mk = |est: f64, se: f64| ParamInterval { estimate: est, std_error: se, low: est - z * se, high: est + z * se };
    Ok((mk(fit.params.alpha, variance.std_error(0)), mk(fit.params.beta, variance.std_error(1))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Composition {
    /// Not composed: a direct estimate.
    Direct,
    /// Log-advantages add, variances add (independent estimates).
    LogNormalSum,
    /// Interval endpoints multiply.
    EndpointProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageEstimate {
    pub gamma: Advantage,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    /// Standard error of `ln gamma` on this estimate's period.
    pub log_std_error: f64,
    pub composition: Composition,
}

impl AdvantageEstimate {
    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    /// Same estimate expressed over `target_days`.
    pub fn rescaled(&self, target_days: f64) -> Result<AdvantageEstimate> {
        if !(target_days > 0.0) {
            return Err(Error::NonPositivePeriod(target_days));
        }
        let r = target_days / self.gamma.period_days;
        Ok(AdvantageEstimate {
            gamma: Advantage { value: (r * self.gamma.ln()).exp(), period_days: target_days },
            ci_low: (r * self.ci_low.ln()).exp(),
            ci_high: (r * self.ci_high.ln()).exp(),
            level: self.level,
            log_std_error: r * self.log_std_error,
            composition: self.composition,
        })
    }
}

/// `exp{(target_days / period_days) (beta ± z se_beta)}`.
pub fn interval_for_gamma(
    variance: &VarianceEstimate,
    fit: &FitResult,
    target_days: f64,
    level: f64,
) -> Result<AdvantageEstimate> {
    if !(target_days > 0.0) || !target_days.is_finite() {
        return Err(Error::NonPositivePeriod(target_days));
    }
    if !variance.is_paired_with(fit) {
        return Err(Error::InvalidArgument("variance was not computed at this fit".into()));
    }
    let z = z_for_level(level)?;
    let r = target_days / fit.period_days;
    let se = r * variance.std_error(1);
    let centre = r * fit.params.beta;
    Ok(AdvantageEstimate {
        gamma: Advantage::new(centre.exp(), target_days)?,
        ci_low: (centre - z * se).exp(),
        ci_high: (centre + z * se).exp(),
        level,
        log_std_error: se,
        composition: Composition::Direct,
    })
}

/// Chains `a` (B vs A) and `b` (C vs B) into C vs A.
pub fn compose_advantages(
    a: &AdvantageEstimate,
    b: &AdvantageEstimate,
    rule: Composition,
) -> Result<AdvantageEstimate> {
    if (a.gamma.period_days - b.gamma.period_days).abs() > 1e-12 {
        return Err(Error::PeriodMismatch(a.gamma.period_days, b.gamma.period_days));
    }
    let value = a.gamma.value * b.gamma.value;
    let log_se = (a.log_std_error.powi(2) + b.log_std_error.powi(2)).sqrt();
    let (lo, hi) = match rule {
        Composition::EndpointProduct | Composition::Direct => (a.ci_low * b.ci_low, a.ci_high * b.ci_high),
        Composition::LogNormalSum => {
            if (a.level - b.level).abs() > 1e-12 {
                return Err(Error::InvalidArgument("cannot compose intervals at different levels".into()));
            }
            let z = z_for_level(a.level)?;
            let c = value.ln();
            ((c - z * log_se).exp(), (c + z * log_se).exp())
        }
    };
    Ok(AdvantageEstimate {
        gamma: Advantage::new(value, a.gamma.period_days)?,
        ci_low: lo,
        ci_high: hi,
        level: a.level,
        log_std_error: log_se,
        composition: if rule == Composition::Direct { Composition::EndpointProduct } else { rule },
    })
}
