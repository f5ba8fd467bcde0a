//! Binomial maximum likelihood for the logistic proportion model.
//!
//! `X_t ~ Bin(N_t, lambda_t)` with `lambda_t = 1 / (1 + exp(-alpha - beta t))`.
//! The log-likelihood (dropping the binomial coefficients) is
//!
//! ```text
//! l(alpha, beta) = sum_t X_t log lambda_t + (N_t - X_t) log(1 - lambda_t)
//! ```
//!
//! Sign convention: [`score`] returns the gradient of `l`, i.e.
//! `sum_t (X_t - N_t lambda_t) (1, t)`. The textbook per-period expression
//! `(N_t lambda_t - X_t)(1, t)` is its negative; for the sandwich variance the
//! sign is irrelevant because only outer products of scores enter.
//!
//! The objective is globally concave, so a damped Newton iteration converges
//! from any start.

use serde::Serialize;

use crate::data::{ModelParams, SurveillanceSeries};
use crate::dynamics::{log1p_exp, logistic};
use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    /// Convergence threshold on the max-abs score component, per unit of
    /// `sum N_t max(1, |t|)` so that it means the same at any sequencing volume.
    pub tolerance: f64,
    /// Convergence threshold on the max-abs Newton step.
    pub step_tolerance: f64,
    pub max_iterations: usize,
    pub initial: Option<ModelParams>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tolerance: 1e-8, step_tolerance: 1e-10, max_iterations: 100, initial: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: ModelParams,
    /// Log-likelihood up to the binomial-coefficient constant.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(t_index, fitted lambda_t)` for every record of the series.
    pub fitted: Vec<(i64, f64)>,
    /// Max-abs component of the score at `params`.
    pub score_norm: f64,
    pub period_days: f64,
}

impl FitResult {
    /// Per-period advantage `exp(beta)`.
    pub fn gamma(&self) -> f64 {
        self.params.beta.exp()
    }

    /// Advantage over `days` calendar days.
    pub fn gamma_over(&self, days: f64) -> f64 {
        (days / self.period_days * self.params.beta).exp()
    }

    pub fn lambda_at(&self, t: f64) -> f64 {
        logistic(self.params.eta(t))
    }
}

fn informative(series: &SurveillanceSeries) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
    series
        .records()
        .iter()
        .filter(|r| r.sequenced > 0)
        .map(|r| (r.t_index as f64, r.sequenced as f64, r.variant_count as f64))
}

pub fn log_likelihood(series: &SurveillanceSeries, params: &ModelParams) -> f64 {
    informative(series)
        .map(|(t, n, x)| {
            let eta = params.eta(t);
            // log lambda = -log1p(e^-eta), log(1 - lambda) = -log1p(e^eta)
            -x * log1p_exp(-eta) - (n - x) * log1p_exp(eta)
        })
        .sum()
}

/// Per-record score contributions `(X_t - N_t lambda_t) (1, t)`, one per record
/// (zero for records with nothing sequenced).
pub fn score_contributions(series: &SurveillanceSeries, params: &ModelParams) -> Vec<Vec2> {
    series
        .records()
        .iter()
        .map(|r| {
            let t = r.t_index as f64;
            let resid = r.variant_count as f64 - r.sequenced as f64 * logistic(params.eta(t));
            [resid, resid * t]
        })
        .collect()
}

pub fn score(series: &SurveillanceSeries, params: &ModelParams) -> Vec2 {
    score_contributions(series, params).iter().fold([0.0, 0.0], |acc, s| [acc[0] + s[0], acc[1] + s[1]])
}

/// Hessian `-sum_t N_t lambda_t (1 - lambda_t) [[1, t], [t, t^2]]`.
pub fn hessian(series: &SurveillanceSeries, params: &ModelParams) -> Mat2 {
    let mut h = [[0.0; 2]; 2];
    for (t, n, _) in informative(series) {
        let l = logistic(params.eta(t));
        let w = n * l * (1.0 - l);
        h[0][0] -= w;
        h[0][1] -= w * t;
        h[1][1] -= w * t * t;
    }
    h[1][0] = h[0][1];
    h
}

pub(crate) fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub(crate) fn inv2(m: &Mat2) -> Option<Mat2> {
    let det = det2(m);
    let scale = m[0][0].abs().max(m[1][1].abs()).max(m[0][1].abs());
    if !det.is_finite() || det.abs() <= 1e-13 * scale * scale || scale == 0.0 {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn max_abs(v: &Vec2) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Checks that the MLE exists: at least two distinct informative periods and
/// no (quasi-)complete separation of variant and non-variant cases along `t`.
pub fn check_identifiable(series: &SurveillanceSeries) -> Result<()> {
    let info: Vec<_> = series.records().iter().filter(|r| r.sequenced > 0).collect();
    let distinct = info.windows(2).filter(|w| w[0].t_index != w[1].t_index).count() + 1;
    if info.is_empty() || distinct < 2 {
        return Err(Error::Singular(format!(
            "need at least 2 periods with sequenced cases, got {}",
            if info.is_empty() { 0 } else { distinct }
        )));
    }
    if info.iter().all(|r| r.variant_count == 0) {
        return Err(Error::Separation("no variant cases in any period".into()));
    }
    if info.iter().all(|r| r.variant_count == r.sequenced) {
        return Err(Error::Separation("only variant cases in every period".into()));
    }
    let succ = info.iter().filter(|r| r.variant_count > 0).map(|r| r.t_index);
    let fail = info.iter().filter(|r| r.variant_count < r.sequenced).map(|r| r.t_index);
    let (min_s, max_s) = succ.fold((i64::MAX, i64::MIN), |(lo, hi), t| (lo.min(t), hi.max(t)));
    let (min_f, max_f) = fail.fold((i64::MAX, i64::MIN), |(lo, hi), t| (lo.min(t), hi.max(t)));
    if max_f <= min_s || max_s <= min_f {
        return Err(Error::Separation("variant and non-variant cases are separated in time".into()));
    }
    Ok(())
}

/// Starting point: unweighted least squares of `log((X+0.5)/(N-X+0.5))` on `t`.
fn initial_guess(series: &SurveillanceSeries) -> ModelParams {
    let pts: Vec<(f64, f64)> = informative(series).map(|(t, n, x)| (t, ((x + 0.5) / (n - x + 0.5)).ln())).collect();
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let beta = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    ModelParams { alpha: my - beta * mt, beta }
}

/// Damped Newton maximisation of [`log_likelihood`].
///
/// Iterates in a time-centred parameterisation for conditioning and reports
/// the result in the raw `t_index` parameterisation.
pub fn fit(series: &SurveillanceSeries, options: &FitOptions) -> Result<FitResult> {
    check_identifiable(series)?;

    let (wsum, tw) = informative(series).fold((0.0, 0.0), |(a, b), (t, n, _)| (a + n, b + n * t));
    let center = tw / wsum;
    let score_tol = options.tolerance * score_scale(informative(series).map(|(t, n, _)| (t, n)));

    let start = options.initial.unwrap_or_else(|| initial_guess(series));
    // theta_c = (alpha + beta * center, beta)
    let mut a_c = start.alpha + start.beta * center;
    let mut beta = start.beta;
    let to_raw = |a_c: f64, beta: f64| ModelParams { alpha: a_c - beta * center, beta };

    let mut iterations = 0;
    loop {
        let raw = to_raw(a_c, beta);
        let g = score(series, &raw);
        let h = hessian(series, &raw);
        // Chain rule to centred coordinates: d/da_c = d/dalpha, d/dbeta|c = d/dbeta - center d/dalpha.
        let gc = [g[0], g[1] - center * g[0]];
        let hc = [
            [h[0][0], h[0][1] - center * h[0][0]],
            [h[0][1] - center * h[0][0], h[1][1] - 2.0 * center * h[0][1] + center * center * h[0][0]],
        ];
        let hinv =
            inv2(&hc).ok_or_else(|| Error::Singular(format!("Hessian not invertible at iteration {iterations}")))?;
        let step = [-(hinv[0][0] * gc[0] + hinv[0][1] * gc[1]), -(hinv[1][0] * gc[0] + hinv[1][1] * gc[1])];
        let score_norm = max_abs(&g);
        let raw_step = [step[0] - center * step[1], step[1]];
        if score_norm <= score_tol && max_abs(&raw_step) <= options.step_tolerance {
            return Ok(finish(series, raw, iterations, score_norm));
        }
        if iterations >= options.max_iterations {
            return Err(Error::MaxIterations { iterations, score_norm });
        }
        iterations += 1;

        let ll0 = log_likelihood(series, &raw);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = (a_c + scale * step[0], beta + scale * step[1]);
            let ll = log_likelihood(series, &to_raw(cand.0, cand.1));
            if ll.is_finite() && ll >= ll0 - 1e-12 * ll0.abs() {
                a_c = cand.0;
                beta = cand.1;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            // No ascent possible along the Newton direction: we are at the
            // numerical optimum.
            let raw = to_raw(a_c, beta);
            let score_norm = max_abs(&score(series, &raw));
            if score_norm <= score_tol {
                return Ok(finish(series, raw, iterations, score_norm));
            }
            return Err(Error::MaxIterations { iterations, score_norm });
        }
    }
}

/// `max(1, sum N_t max(1, |t|))`, the magnitude scale of the score.
pub(crate) fn score_scale(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    points.map(|(t, n)| n * t.abs().max(1.0)).sum::<f64>().max(1.0)
}

fn finish(series: &SurveillanceSeries, params: ModelParams, iterations: usize, score_norm: f64) -> FitResult {
    let fitted = series.records().iter().map(|r| (r.t_index, logistic(params.eta(r.t_index as f64)))).collect();
    FitResult {
        params,
        log_likelihood: log_likelihood(series, &params),
        iterations,
        converged: true,
        fitted,
        score_norm,
        period_days: series.period_days(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ObservationRecord;
    use crate::datasets::Dataset;

    fn series(rows: &[(i64, u64, u64)]) -> SurveillanceSeries {
        let recs = rows.iter().map(|&(t, n, x)| ObservationRecord::new(t, t.to_string(), n, x)).collect();
        SurveillanceSeries::new(recs, 7.0).unwrap()
    }

    #[test]
    fn half_proportions_at_origin() {
        let s = series(&[(1, 10, 5), (2, 40, 20), (3, 6, 3)]);
        let ll = log_likelihood(&s, &ModelParams { alpha: 0.0, beta: 0.0 });
        assert!((ll - 56.0 * 0.5f64.ln()).abs() < 1e-12);
        let f = fit(&s, &FitOptions::default()).unwrap();
        assert!(f.params.alpha.abs() < 1e-9 && f.params.beta.abs() < 1e-9);
    }

    #[test]
    fn saturated_two_point_fit() {
        let s = series(&[(1, 10, 2), (2, 10, 5)]);
        let f = fit(&s, &FitOptions::default()).unwrap();
        assert!(f.converged);
        assert!((f.fitted[0].1 - 0.2).abs() < 1e-10);
        assert!((f.fitted[1].1 - 0.5).abs() < 1e-10);
        let sc = score(&s, &f.params);
        assert!(sc[0].abs() < 1e-8 && sc[1].abs() < 1e-8);
    }

    #[test]
    fn single_period_is_singular() {
        let s = series(&[(1, 10, 2), (2, 0, 0)]);
        assert!(matches!(fit(&s, &FitOptions::default()), Err(Error::Singular(_))));
        let h = hessian(&s, &ModelParams { alpha: 0.3, beta: 0.1 });
        assert!(det2(&h).abs() < 1e-12);
        assert!(inv2(&h).is_none());
    }

    #[test]
    fn separation_detected() {
        let zero = series(&[(1, 10, 0), (2, 10, 0), (3, 5, 0)]);
        assert!(matches!(fit(&zero, &FitOptions::default()), Err(Error::Separation(_))));
        let all = series(&[(1, 10, 10), (2, 10, 10)]);
        assert!(matches!(fit(&all, &FitOptions::default()), Err(Error::Separation(_))));
        let split = series(&[(1, 10, 0), (2, 10, 0), (3, 10, 10)]);
        assert!(matches!(fit(&split, &FitOptions::default()), Err(Error::Separation(_))));
        let quasi = series(&[(1, 10, 0), (2, 10, 5)]);
        assert!(matches!(fit(&quasi, &FitOptions::default()), Err(Error::Separation(_))));
    }

    #[test]
    fn max_iterations_reported() {
        let s = Dataset::Alpha.series();
        let opts = FitOptions { max_iterations: 1, ..FitOptions::default() };
        assert!(matches!(fit(&s, &opts), Err(Error::MaxIterations { .. })));
    }

    #[test]
    fn alpha_fit_reference_values() {
        let s = Dataset::Alpha.series();
        let f = fit(&s, &FitOptions::default()).unwrap();
        assert!((f.params.beta - 0.619).abs() < 1e-3, "{:?}", f.params);
        assert!((f.gamma() - 1.86).abs() < 5e-3);
        assert!((f.params.alpha + 8.75).abs() < 5e-3);
        assert!(f.score_norm <= 1e-8);
        let h = hessian(&s, &f.params);
        // negative definite: h00 < 0 and det > 0
        assert!(h[0][0] < 0.0 && det2(&h) > 0.0);
    }

    #[test]
    fn starting_point_does_not_matter() {
        let s = Dataset::Delta.series();
        let a = fit(&s, &FitOptions::default()).unwrap();
        let b = fit(&s, &FitOptions { initial: Some(ModelParams { alpha: 3.0, beta: -2.0 }), ..Default::default() })
            .unwrap();
        assert!((a.params.alpha - b.params.alpha).abs() < 1e-8);
        assert!((a.params.beta - b.params.beta).abs() < 1e-9);
    }

    #[test]
    fn zero_sequenced_period_is_inert() {
        let base = series(&[(1, 50, 3), (2, 60, 9), (4, 40, 15)]);
        let with_gap = series(&[(1, 50, 3), (2, 60, 9), (3, 0, 0), (4, 40, 15)]);
        let a = fit(&base, &FitOptions::default()).unwrap();
        let b = fit(&with_gap, &FitOptions::default()).unwrap();
        assert!((a.params.alpha - b.params.alpha).abs() < 1e-10);
        assert!((a.params.beta - b.params.beta).abs() < 1e-10);
        assert_eq!(score_contributions(&with_gap, &b.params)[2], [0.0, 0.0]);
    }
}
