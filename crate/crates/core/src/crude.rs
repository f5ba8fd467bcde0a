//! Model-free diagnostics: per-period ratios of consecutive empirical odds
//! and Wilson intervals for the observed proportions.

use serde::Serialize;

use crate::data::SurveillanceSeries;
use crate::error::Result;
use crate::robust::z_for_level;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrudeMeasure {
    pub t_index: i64,
    /// Empirical per-period advantage.
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Whether the +0.5 continuity correction was applied to this pair.
    pub corrected: bool,
}

/// One measure per adjacent pair of records with sequenced cases.
///
/// The odds ratio `(X_t / (N_t - X_t)) / (X_s / (N_s - X_s))` is taken to the
/// power `1 / (t - s)` so gapped pairs are expressed per single period. When
/// any of the four cells is zero, all four get +0.5. Intervals are Wald on the
/// log scale with variance `1/X_t + 1/(N_t-X_t) + 1/X_s + 1/(N_s-X_s)`.
pub fn crude_gammas(series: &SurveillanceSeries, level: f64) -> Result<Vec<CrudeMeasure>> {
    let z = z_for_level(level)?;
    let rows: Vec<_> = series.records().iter().filter(|r| r.sequenced > 0).collect();
    Ok(rows
        .windows(2)
        .map(|w| {
            let (prev, cur) = (w[0], w[1]);
            let mut cells = [
                cur.variant_count as f64,
                (cur.sequenced - cur.variant_count) as f64,
                prev.variant_count as f64,
                (prev.sequenced - prev.variant_count) as f64,
            ];
            let corrected = cells.contains(&0.0);
            if corrected {
                cells.iter_mut().for_each(|c| *c += 0.5);
            }
            let dt = (cur.t_index - prev.t_index) as f64;
            let log_ratio = ((cells[0] / cells[1]) / (cells[2] / cells[3])).ln() / dt;
            let se = cells.iter().map(|c| 1.0 / c).sum::<f64>().sqrt() / dt;
            CrudeMeasure {
                t_index: cur.t_index,
                value: log_ratio.exp(),
                ci_low: (log_ratio - z * se).exp(),
                ci_high: (log_ratio + z * se).exp(),
                corrected,
            }
        })
        .collect())
}

pub fn mean_value(measures: &[CrudeMeasure]) -> f64 {
    measures.iter().map(|m| m.value).sum::<f64>() / measures.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProportionInterval {
    pub t_index: i64,
    pub proportion: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval for `x` successes out of `n > 0`.
pub fn wilson(x: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = x as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if x == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if x as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo.min(p), hi.max(p))
}

/// Wilson intervals for every record with `N_t > 0`.
pub fn proportion_intervals(series: &SurveillanceSeries, level: f64) -> Result<Vec<ProportionInterval>> {
    let z = z_for_level(level)?;
    Ok(series
        .records()
        .iter()
        .filter(|r| r.sequenced > 0)
        .map(|r| {
            let (lo, hi) = wilson(r.variant_count, r.sequenced, z);
            ProportionInterval {
                t_index: r.t_index,
                proportion: r.variant_count as f64 / r.sequenced as f64,
                ci_low: lo,
                ci_high: hi,
            }
        })
        .collect())
}
