//! Effective reproduction number of the emerging variant.
//!
//! If all cases reproduce at `R` per generation, a share `lambda` are the new
//! variant and the new variant's advantage per generation is `gamma`, then
//! counting cases one generation back gives
//!
//! ```text
//! 1/R = lambda / R_B + (1 - lambda) / R_A,   R_A = R_B / gamma
//! =>  R_B = R (lambda + gamma (1 - lambda))
//! ```

use serde::Serialize;

use crate::data::SurveillanceSeries;
use crate::dynamics::{Advantage, Proportion, DEFAULT_GENERATION_DAYS};
use crate::error::{Error, Result};
use crate::robust::AdvantageEstimate;

/// Elasticity of detected cases with respect to testing volume.
pub const DEFAULT_TEST_EXPONENT: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReproInference {
    pub r_all: f64,
    pub lambda: Proportion,
    pub gamma_gen: Advantage,
    /// Reproduction number of the emerging variant.
    pub r_variant: f64,
    /// Reproduction number of the incumbent variant.
    pub r_incumbent: f64,
}

pub fn infer_variant_r(r_all: f64, lambda: Proportion, gamma_gen: Advantage) -> Result<ReproInference> {
    if !(r_all > 0.0) || !r_all.is_finite() {
        return Err(Error::NonPositiveR(r_all));
    }
    let l = lambda.value();
    let r_variant = r_all * (l + gamma_gen.value * (1.0 - l));
    Ok(ReproInference { r_all, lambda, gamma_gen, r_variant, r_incumbent: r_variant / gamma_gen.value })
}

/// Options for the testing-intensity adjusted case-ratio estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjustedROptions {
    pub generation_days: f64,
    pub period_days: f64,
    pub test_exponent: f64,
}

impl Default for AdjustedROptions {
    fn default() -> Self {
        AdjustedROptions {
            generation_days: DEFAULT_GENERATION_DAYS,
            period_days: 7.0,
            test_exponent: DEFAULT_TEST_EXPONENT,
        }
    }
}

/// `[(C_t / C_{t-1}) (T_t / T_{t-1})^(-e)]^(gen / period)`.
pub fn adjusted_r(
    cases_t: u64,
    cases_prev: u64,
    tested_t: u64,
    tested_prev: u64,
    options: &AdjustedROptions,
) -> Result<f64> {
    for (name, v) in
        [("cases_t", cases_t), ("cases_prev", cases_prev), ("tested_t", tested_t), ("tested_prev", tested_prev)]
    {
        if v == 0 {
            return Err(Error::NonPositiveCount(format!("{name} is zero")));
        }
    }
    if !(options.period_days > 0.0) {
        return Err(Error::NonPositivePeriod(options.period_days));
    }
    let log_ratio =
        (cases_t as f64 / cases_prev as f64).ln() - options.test_exponent * (tested_t as f64 / tested_prev as f64).ln();
    Ok((options.generation_days / options.period_days * log_ratio).exp())
}

/// Observed proportion and adjusted `R` for one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReproPoint {
    pub t_index: i64,
    pub proportion: f64,
    pub r_hat: f64,
}

/// Adjusted `R` for each consecutive pair of records that carry both case
/// and test counts. Gapped pairs are skipped.
pub fn reproduction_points(series: &SurveillanceSeries, options: &AdjustedROptions) -> Result<Vec<ReproPoint>> {
    let mut out = Vec::new();
    for w in series.records().windows(2) {
        let (p, c) = (&w[0], &w[1]);
        if c.t_index - p.t_index != 1 || c.sequenced == 0 {
            continue;
        }
        if let (Some(ct), Some(cp), Some(tt), Some(tp)) = (c.total_cases, p.total_cases, c.tested, p.tested) {
            out.push(ReproPoint {
                t_index: c.t_index,
                proportion: c.variant_count as f64 / c.sequenced as f64,
                r_hat: adjusted_r(ct, cp, tt, tp, options)?,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub lambda: f64,
    /// Aggregate `R` at which the emerging variant has `R_B = 1`.
    pub threshold: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn r_threshold(lambda: f64, gamma: f64) -> f64 {
    1.0 / (lambda + gamma * (1.0 - lambda))
}

/// Stability boundary `R_B(lambda, R, gamma) = 1` over a grid of `lambda`,
/// with the band traced by the interval endpoints of `gamma`.
pub fn stability_region(gamma: &AdvantageEstimate, lambda_grid: &[Proportion]) -> Vec<ThresholdPoint> {
    lambda_grid
        .iter()
        .map(|l| {
            let l = l.value();
            let a = r_threshold(l, gamma.ci_low);
            let b = r_threshold(l, gamma.ci_high);
            ThresholdPoint { lambda: l, threshold: r_threshold(l, gamma.gamma.value), lo: a.min(b), hi: a.max(b) }
        })
        .collect()
}

/// `from, from+step, ...` up to and including `to` (within rounding), clamped to `[0, 1]`.
pub fn lambda_grid(from: f64, to: f64, step: f64) -> Result<Vec<Proportion>> {
    if !(step > 0.0) || !(from <= to) {
        return Err(Error::InvalidArgument(format!("bad grid {from}:{to}:{step}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| Proportion::new((from + i as f64 * step).clamp(0.0, 1.0))).collect()
}

pub fn write_contour_csv<W: std::io::Write>(points: &[ThresholdPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["lambda", "threshold", "lo", "hi"]).map_err(|e| Error::Io(e.to_string()))?;
    for p in points {
        w.write_record([
            crate::report::fmt_num(p.lambda),
            crate::report::fmt_num(p.threshold),
            crate::report::fmt_num(p.lo),
            crate::report::fmt_num(p.hi),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::Dataset;
    use crate::robust::Composition;
    use proptest::prelude::*;

    fn p(x: f64) -> Proportion {
        Proportion::new(x).unwrap()
    }
    fn g(x: f64) -> Advantage {
        Advantage::new(x, 4.7).unwrap()
    }

    #[test]
    fn infer_examples() {
        assert_eq!(infer_variant_r(0.8, p(1.0), g(2.0)).unwrap().r_variant, 0.8);
        assert!((infer_variant_r(0.8, p(0.0), g(2.0)).unwrap().r_variant - 1.6).abs() < 1e-15);
        let r = infer_variant_r(0.9, p(0.5), g(1.5)).unwrap();
        assert!((r.r_variant - 1.125).abs() < 1e-12);
        assert!((r.r_incumbent - 0.75).abs() < 1e-12);
        assert_eq!(infer_variant_r(0.0, p(0.5), g(1.5)).unwrap_err(), Error::NonPositiveR(0.0));
    }

    #[test]
    fn adjusted_examples() {
        let opts = AdjustedROptions::default();
        let same = adjusted_r(300, 200, 1000, 1000, &opts).unwrap();
        assert!((same - 1.5f64.powf(4.7 / 7.0)).abs() < 1e-12);
        let doubled = adjusted_r(200, 100, 2000, 1000, &opts).unwrap();
        assert!((doubled - 2f64.powf(0.3 * 4.7 / 7.0)).abs() < 1e-12);
        assert!((doubled - 1.1498).abs() < 5e-4, "{doubled}");
        let wk10 = adjusted_r(3809, 3616, 1_056_404, 1_033_111, &opts).unwrap();
        let oracle = (4.7 / 7.0 * ((3809.0f64 / 3616.0).ln() - 0.7 * (1_056_404.0f64 / 1_033_111.0).ln())).exp();
        assert!((wk10 - oracle).abs() < 1e-14);
        assert!((wk10 - 1.025).abs() < 1e-3, "{wk10}");
        assert!(matches!(adjusted_r(0, 1, 1, 1, &opts), Err(Error::NonPositiveCount(_))));
    }

    #[test]
    fn threshold_examples() {
        let est = AdvantageEstimate {
            gamma: g(1.51),
            ci_low: 1.50,
            ci_high: 1.53,
            level: 0.95,
            log_std_error: 0.005,
            composition: Composition::Direct,
        };
        let grid = lambda_grid(0.0, 1.0, 0.01).unwrap();
        assert_eq!(grid.len(), 101);
        let pts = stability_region(&est, &grid);
        assert!((pts[0].threshold - 1.0 / 1.51).abs() < 1e-12);
        assert!((pts[0].threshold - 0.662).abs() < 5e-4);
        let last = pts.last().unwrap();
        assert_eq!(last.lambda, 1.0);
        assert_eq!((last.threshold, last.lo, last.hi), (1.0, 1.0, 1.0));
        for w in pts.windows(2) {
            assert!(w[1].threshold > w[0].threshold);
            assert!(w[1].hi - w[1].lo <= w[0].hi - w[0].lo + 1e-15);
        }
    }

    #[test]
    fn alpha_points_lie_above_threshold() {
        let s = Dataset::Alpha.series();
        let pts = reproduction_points(&s, &AdjustedROptions::default()).unwrap();
        assert_eq!(pts.len(), 17);
        let gamma_gen = (4.7f64 / 7.0 * 0.6186).exp();
        for pt in &pts {
            assert!(pt.r_hat > r_threshold(pt.proportion, gamma_gen), "{pt:?}");
        }
    }

    proptest! {
        #[test]
        fn generation_identity(r in 0.05f64..5.0, l in 0.0f64..=1.0, gamma in 0.1f64..10.0) {
            let inf = infer_variant_r(r, p(l), g(gamma)).unwrap();
            let lhs = l / inf.r_variant + (1.0 - l) * gamma / inf.r_variant;
            prop_assert!((lhs - 1.0 / r).abs() < 1e-12 * (1.0 / r).max(1.0));
            prop_assert!(inf.r_variant >= gamma.min(1.0) * r * (1.0 - 1e-12));
            prop_assert!(inf.r_variant <= gamma.max(1.0) * r * (1.0 + 1e-12));
        }

        #[test]
        fn threshold_crosses_one(l in 0.0f64..=1.0, gamma in 0.1f64..10.0) {
            let thr = r_threshold(l, gamma);
            let inf = infer_variant_r(thr, p(l), g(gamma)).unwrap();
            prop_assert!((inf.r_variant - 1.0).abs() < 1e-12);
        }

        #[test]
        fn adjusted_r_ignores_test_scale(c1 in 1u64..100_000, c0 in 1u64..100_000, t1 in 1u64..10_000, t0 in 1u64..10_000, k in 1u64..50) {
            let o = AdjustedROptions::default();
            let a = adjusted_r(c1, c0, t1, t0, &o).unwrap();
            let b = adjusted_r(c1, c0, t1 * k, t0 * k, &o).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * a);
        }
    }
}
