//! Point forecasts of the variant proportion with delta-method bands.
//!
//! At absolute time `t` the band is the logistic map of
//! `alpha + beta t ± c sqrt(v(t))` with `v(t) = (1, t) Sigma (1, t)'`.
//! Bands carry parameter uncertainty only.

use serde::Serialize;

use crate::dynamics::logistic;
use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::robust::VarianceEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForecastPoint {
    pub t: f64,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastBand {
    pub c: f64,
    pub points: Vec<ForecastPoint>,
}

pub fn forecast(fit: &FitResult, variance: &VarianceEstimate, horizons: &[f64], c: f64) -> Result<ForecastBand> {
    if !(c >= 0.0) {
        return Err(Error::NegativeC(c));
    }
    if variance.dim() != 2 {
        return Err(Error::InvalidArgument("forecast needs a 2x2 variance".into()));
    }
    let points = horizons
        .iter()
        .map(|&t| {
            let eta = fit.params.eta(t);
            let half = c * variance.linear_predictor_variance(t).max(0.0).sqrt();
            let point = logistic(eta);
            ForecastPoint { t, point, lower: logistic(eta - half).min(point), upper: logistic(eta + half).max(point) }
        })
        .collect();
    Ok(ForecastBand { c, points })
}

/// `count` consecutive periods after `last_t`.
pub fn horizons_after(last_t: i64, count: usize) -> Vec<f64> {
    (1..=count as i64).map(|h| (last_t + h) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::Dataset;
    use crate::estimation::{fit, FitOptions};
    use crate::robust::{fisher_information, hac_sandwich};

    #[test]
    fn zero_c_collapses() {
        let s = Dataset::Alpha.series();
        let f = fit(&s, &FitOptions::default()).unwrap();
        let v = hac_sandwich(&s, &f, 4).unwrap();
        let band = forecast(&f, &v, &horizons_after(18, 5), 0.0).unwrap();
        for p in &band.points {
            assert_eq!(p.lower, p.point);
            assert_eq!(p.upper, p.point);
        }
        assert_eq!(forecast(&f, &v, &[19.0], -1.0).unwrap_err(), Error::NegativeC(-1.0));
        assert!(forecast(&f, &v, &[], 2.0).unwrap().points.is_empty());
    }

    #[test]
    fn in_sample_point_matches_fit() {
        let s = Dataset::Delta.series();
        let f = fit(&s, &FitOptions::default()).unwrap();
        let v = fisher_information(&s, &f).unwrap();
        let band = forecast(&f, &v, &[10.0], 2.0).unwrap();
        assert_eq!(band.points[0].point, f.fitted[9].1);
    }

    #[test]
    fn bands_nest_in_c() {
        let s = Dataset::Alpha.series().window(5, 10).unwrap();
        let f = fit(&s, &FitOptions::default()).unwrap();
        let v = fisher_information(&s, &f).unwrap();
        let h = horizons_after(10, 8);
        let b2 = forecast(&f, &v, &h, 2.0).unwrap();
        let b4 = forecast(&f, &v, &h, 4.0).unwrap();
        for (p, q) in b2.points.iter().zip(&b4.points) {
            assert!(q.lower <= p.lower && p.upper <= q.upper);
            assert!((0.0..=1.0).contains(&q.lower) && (0.0..=1.0).contains(&q.upper));
        }
    }

    #[test]
    fn predictor_variance_is_quadratic() {
        let s = Dataset::Alpha.series();
        let f = fit(&s, &FitOptions::default()).unwrap();
        let v = fisher_information(&s, &f).unwrap();
        // second difference of v(t) equals 2 * Sigma_22
        let (a, b, c) =
            (v.linear_predictor_variance(20.0), v.linear_predictor_variance(21.0), v.linear_predictor_variance(22.0));
        let second = a - 2.0 * b + c;
        assert!((second - 2.0 * v.matrix[(1, 1)]).abs() < 1e-9 * v.matrix[(1, 1)].abs().max(1e-12));
        assert!(v.matrix[(1, 1)] > 0.0);
    }
}
