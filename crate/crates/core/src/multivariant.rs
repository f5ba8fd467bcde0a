//! Competition among `m` variants.
//!
//! Variant 0 is the numéraire with advantage 1. Each other variant `j` has
//! per-period advantage `gamma_j`, and shares evolve as
//!
//! ```text
//! lambda_j' = gamma_j lambda_j / sum_k gamma_k lambda_k
//! ```
//!
//! Iterating gives a multinomial-logistic model with linear predictors
//! `alpha_j + beta_j t` (`beta_j = ln gamma_j`, both zero for the numéraire),
//! fitted here by damped Newton on the multinomial log-likelihood
//! `sum_t sum_j X_jt ln lambda_jt`.
//!
//! Parameters are laid out per variant: `[alpha_1, beta_1, alpha_2, beta_2, ...]`
//! (variants 1..m-1 in zero-based numbering).

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data::{ObservationRecord, SurveillanceSeries};
use crate::error::{Error, Result};
use crate::estimation::FitOptions;
use crate::robust::{hac_meat, invert_information, sandwich, VarianceEstimate, VarianceKind};

/// Per-period counts of `m >= 2` variants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiSeries {
    t_index: Vec<i64>,
    labels: Vec<String>,
    variants: Vec<String>,
    counts: Vec<Vec<u64>>,
    period_days: f64,
}

impl MultiSeries {
    /// Periods with no sequenced cases at all are dropped; the remaining rows
    /// are sorted by `t_index`.
    pub fn new(variants: Vec<String>, rows: Vec<(i64, String, Vec<u64>)>, period_days: f64) -> Result<Self> {
        if !(period_days > 0.0) || !period_days.is_finite() {
            return Err(Error::NonPositivePeriod(period_days));
        }
        let m = variants.len();
        if m < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 variants, got {m}")));
        }
        let mut rows: Vec<_> = rows.into_iter().filter(|r| r.2.iter().sum::<u64>() > 0).collect();
        rows.sort_by_key(|r| r.0);
        for w in rows.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicatePeriod(w[0].0));
            }
        }
        if let Some(bad) = rows.iter().find(|r| r.2.len() != m) {
            return Err(Error::CountViolation {
                t: bad.0,
                detail: format!("expected {m} counts, got {}", bad.2.len()),
            });
        }
        if rows.is_empty() {
            return Err(Error::EmptySeries(0));
        }
        let mut out = MultiSeries {
            t_index: Vec::with_capacity(rows.len()),
            labels: Vec::with_capacity(rows.len()),
            variants,
            counts: Vec::with_capacity(rows.len()),
            period_days,
        };
        for (t, label, c) in rows {
            out.t_index.push(t);
            out.labels.push(label);
            out.counts.push(c);
        }
        Ok(out)
    }

    pub fn variants(&self) -> &[String] {
        &self.variants
    }

    pub fn num_variants(&self) -> usize {
        self.variants.len()
    }

    pub fn len(&self) -> usize {
        self.t_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_index.is_empty()
    }

    pub fn t_index(&self) -> &[i64] {
        &self.t_index
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn period_days(&self) -> f64 {
        self.period_days
    }

    pub fn totals(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().map(|c| c.iter().sum())
    }

    /// Reorders variant columns; `order[k]` is the old index placed at position `k`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let m = self.num_variants();
        let mut seen = vec![false; m];
        if order.len() != m || order.iter().any(|&i| i >= m || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::InvalidIndex(format!("{order:?} is not a permutation of 0..{m}")));
        }
        Ok(MultiSeries {
            t_index: self.t_index.clone(),
            labels: self.labels.clone(),
            variants: order.iter().map(|&i| self.variants[i].clone()).collect(),
            counts: self.counts.iter().map(|c| order.iter().map(|&i| c[i]).collect()).collect(),
            period_days: self.period_days,
        })
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut header = vec!["t".to_string(), "label".to_string()];
        header.extend(self.variants.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for ((t, label), c) in self.t_index.iter().zip(&self.labels).zip(&self.counts) {
            let mut row = vec![t.to_string(), label.clone()];
            row.extend(c.iter().map(u64::to_string));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parses `t,label,<variant 1>,...,<variant m>`.
pub fn read_multi_csv<R: Read>(reader: R, period_days: f64) -> Result<MultiSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::ParseError { row: 1, message: e.to_string() })?.clone();
    if header.len() < 4 || &header[0] != "t" || &header[1] != "label" {
        return Err(Error::ParseError { row: 1, message: "expected header t,label,<variant>,<variant>,...".into() });
    }
    let variants: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i as u64 + 2;
        let rec = rec.map_err(|e| Error::ParseError { row, message: e.to_string() })?;
        let perr = |message: String| Error::ParseError { row, message };
        let t = rec[0].parse::<i64>().map_err(|e| perr(format!("t: {e}")))?;
        let counts = rec
            .iter()
            .skip(2)
            .map(|v| v.parse::<u64>().map_err(|e| perr(format!("count '{v}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push((t, rec[1].to_string(), counts));
    }
    MultiSeries::new(variants, rows, period_days)
}

pub fn load_multi_csv(path: impl AsRef<Path>, period_days: f64) -> Result<MultiSeries> {
    let f = std::fs::File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_multi_csv(f, period_days)
}

/// One step of the `m`-variant share recursion. `gammas[0]` is the
/// numéraire's advantage (normally 1).
pub fn step_lambda_multi(lambdas: &[f64], gammas: &[f64]) -> Result<Vec<f64>> {
    if lambdas.len() != gammas.len() {
        return Err(Error::InvalidArgument(format!("{} shares but {} advantages", lambdas.len(), gammas.len())));
    }
    if lambdas.iter().any(|&l| !(l >= 0.0)) || (lambdas.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("shares must be non-negative and sum to 1".into()));
    }
    if gammas.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::InvalidArgument("advantages must be positive".into()));
    }
    let weighted: Vec<f64> = lambdas.iter().zip(gammas).map(|(l, g)| l * g).collect();
    let total: f64 = weighted.iter().sum();
    Ok(weighted.into_iter().map(|w| w / total).collect())
}

/// Multinomial-logistic parameters for variants `1..m` relative to variant 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiParams {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl MultiParams {
    pub fn zeros(others: usize) -> Self {
        MultiParams { alphas: vec![0.0; others], betas: vec![0.0; others] }
    }

    fn from_flat(theta: &[f64]) -> Self {
        MultiParams {
            alphas: theta.iter().step_by(2).copied().collect(),
            betas: theta.iter().skip(1).step_by(2).copied().collect(),
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.alphas.iter().zip(&self.betas).flat_map(|(&a, &b)| [a, b]).collect()
    }

    /// `gamma_j = exp(beta_j)` for variants `1..m`.
    pub fn gammas(&self) -> Vec<f64> {
        self.betas.iter().map(|b| b.exp()).collect()
    }

    /// Shares of all `m` variants at time `t`.
    pub fn shares_at(&self, t: f64) -> Vec<f64> {
        let mut eta = Vec::with_capacity(self.alphas.len() + 1);
        eta.push(0.0);
        eta.extend(self.alphas.iter().zip(&self.betas).map(|(a, b)| a + b * t));
        softmax(&eta)
    }

    /// Shares at `t = 0`, the initial proportions.
    pub fn initial_shares(&self) -> Vec<f64> {
        self.shares_at(0.0)
    }
}

fn softmax(eta: &[f64]) -> Vec<f64> {
    let mx = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = eta.iter().map(|x| (x - mx).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn log_softmax(eta: &[f64]) -> Vec<f64> {
    let mx = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = mx + eta.iter().map(|x| (x - mx).exp()).sum::<f64>().ln();
    eta.iter().map(|x| x - lse).collect()
}

fn predictors(theta: &[f64], t: f64) -> Vec<f64> {
    let mut eta = Vec::with_capacity(theta.len() / 2 + 1);
    eta.push(0.0);
    eta.extend(theta.chunks(2).map(|c| c[0] + c[1] * t));
    eta
}

pub fn multi_log_likelihood(series: &MultiSeries, params: &MultiParams) -> f64 {
    ll_flat(series, &params.flat())
}

fn ll_flat(series: &MultiSeries, theta: &[f64]) -> f64 {
    series
        .t_index
        .iter()
        .zip(&series.counts)
        .map(|(&t, c)| {
            let ls = log_softmax(&predictors(theta, t as f64));
            c.iter().zip(&ls).filter(|(&x, _)| x > 0).map(|(&x, l)| x as f64 * l).sum::<f64>()
        })
        .sum()
}

/// Per-period score vectors (length `2(m-1)`).
fn score_rows(series: &MultiSeries, theta: &[f64]) -> Vec<Vec<f64>> {
    series
        .t_index
        .iter()
        .zip(&series.counts)
        .map(|(&t, c)| {
            let tf = t as f64;
            let n: f64 = c.iter().map(|&x| x as f64).sum();
            let lam = softmax(&predictors(theta, tf));
            (1..lam.len())
                .flat_map(|j| {
                    let r = c[j] as f64 - n * lam[j];
                    [r, r * tf]
                })
                .collect()
        })
        .collect()
}

pub fn multi_score(series: &MultiSeries, params: &MultiParams) -> Vec<f64> {
    let rows = score_rows(series, &params.flat());
    let p = 2 * params.alphas.len();
    rows.iter().fold(vec![0.0; p], |mut acc, r| {
        acc.iter_mut().zip(r).for_each(|(a, b)| *a += b);
        acc
    })
}

fn hessian_flat(series: &MultiSeries, theta: &[f64]) -> DMatrix<f64> {
    let p = theta.len();
    let mut h = DMatrix::<f64>::zeros(p, p);
    for (&t, c) in series.t_index.iter().zip(&series.counts) {
        let tf = t as f64;
        let n: f64 = c.iter().map(|&x| x as f64).sum();
        let lam = softmax(&predictors(theta, tf));
        let x = [1.0, tf];
        for j in 1..lam.len() {
            for k in 1..lam.len() {
                let cov = if j == k { lam[j] * (1.0 - lam[j]) } else { -lam[j] * lam[k] };
                for a in 0..2 {
                    for b in 0..2 {
                        h[(2 * (j - 1) + a, 2 * (k - 1) + b)] -= n * cov * x[a] * x[b];
                    }
                }
            }
        }
    }
    h
}

pub fn multi_hessian(series: &MultiSeries, params: &MultiParams) -> DMatrix<f64> {
    hessian_flat(series, &params.flat())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiOptions {
    pub fit: FitOptions,
    pub variance: VarianceKind,
}

impl Default for MultiOptions {
    fn default() -> Self {
        MultiOptions { fit: FitOptions::default(), variance: VarianceKind::Fisher }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiFit {
    pub params: MultiParams,
    pub variance: VarianceEstimate,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub score_norm: f64,
    pub period_days: f64,
}

fn check_identifiable(series: &MultiSeries) -> Result<()> {
    if series.len() < 2 {
        return Err(Error::Singular(format!("need at least 2 periods with sequenced cases, got {}", series.len())));
    }
    for j in 0..series.num_variants() {
        if series.counts.iter().all(|c| c[j] == 0) {
            return Err(Error::Separation(format!("variant '{}' never observed", series.variants[j])));
        }
        if series.counts.iter().all(|c| c[j] == c.iter().sum::<u64>()) {
            return Err(Error::Separation(format!("variant '{}' accounts for every case", series.variants[j])));
        }
    }
    Ok(())
}

fn initial_guess(series: &MultiSeries) -> Vec<f64> {
    let m = series.num_variants();
    let k = series.len() as f64;
    let mt = series.t_index.iter().map(|&t| t as f64).sum::<f64>() / k;
    let sxx: f64 = series.t_index.iter().map(|&t| (t as f64 - mt).powi(2)).sum();
    let mut theta = Vec::with_capacity(2 * (m - 1));
    for j in 1..m {
        let ys: Vec<f64> = series.counts.iter().map(|c| ((c[j] as f64 + 0.5) / (c[0] as f64 + 0.5)).ln()).collect();
        let my = ys.iter().sum::<f64>() / k;
        let sxy: f64 = series.t_index.iter().zip(&ys).map(|(&t, y)| (t as f64 - mt) * (y - my)).sum();
        let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        theta.push(my - b * mt);
        theta.push(b);
    }
    theta
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Joint maximum likelihood for all advantages, with the covariance selected
/// in `options.variance`.
pub fn fit_multi(series: &MultiSeries, options: &MultiOptions) -> Result<MultiFit> {
    check_identifiable(series)?;
    if let VarianceKind::Sandwich { bandwidth } = options.variance {
        if bandwidth >= series.len() {
            return Err(Error::BandwidthTooLarge { bandwidth, periods: series.len() });
        }
    }
    let opts = &options.fit;
    let totals: Vec<f64> = series.totals().map(|n| n as f64).collect();
    let center =
        series.t_index.iter().zip(&totals).map(|(&t, n)| t as f64 * n).sum::<f64>() / totals.iter().sum::<f64>();

    let score_tol = opts.tolerance
        * crate::estimation::score_scale(series.t_index.iter().zip(&totals).map(|(&t, &n)| (t as f64, n)));
    let mut theta = initial_guess(series);
    let p = theta.len();
    // Centring map: alpha_c = alpha + beta * center. raw step = C * centred step.
    let to_centred_grad = |g: &[f64]| -> DVector<f64> {
        DVector::from_iterator(p, g.chunks(2).flat_map(|c| [c[0], c[1] - center * c[0]]))
    };
    let mut iterations = 0;
    loop {
        let rows = score_rows(series, &theta);
        let g = rows.iter().fold(vec![0.0; p], |mut acc, r| {
            acc.iter_mut().zip(r).for_each(|(a, b)| *a += b);
            acc
        });
        let h = hessian_flat(series, &theta);
        // J maps centred to raw coordinates: raw = J centred, J block = [[1, -c], [0, 1]].
        let mut jac = DMatrix::<f64>::identity(p, p);
        for j in 0..p / 2 {
            jac[(2 * j, 2 * j + 1)] = -center;
        }
        let hc = jac.transpose() * &h * &jac;
        let gc = to_centred_grad(&g);
        let neg = -hc;
        let step_c = neg
            .cholesky()
            .ok_or_else(|| Error::Singular(format!("Hessian not negative definite at iteration {iterations}")))?
            .solve(&gc);
        let step = &jac * step_c;
        let score_norm = max_abs(&g);
        if score_norm <= score_tol && step.amax() <= opts.step_tolerance {
            let params = MultiParams::from_flat(&theta);
            let variance = multi_variance(series, &theta, &h, rows, options.variance)?;
            return Ok(MultiFit {
                log_likelihood: ll_flat(series, &theta),
                params,
                variance,
                iterations,
                converged: true,
                score_norm,
                period_days: series.period_days,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::MaxIterations { iterations, score_norm });
        }
        iterations += 1;
        let ll0 = ll_flat(series, &theta);
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + scale * s).collect();
            let ll = ll_flat(series, &cand);
            if ll.is_finite() && ll >= ll0 - 1e-12 * ll0.abs() {
                theta = cand;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            return Err(Error::MaxIterations { iterations, score_norm });
        }
    }
}

fn multi_variance(
    series: &MultiSeries,
    theta: &[f64],
    hessian: &DMatrix<f64>,
    rows: Vec<Vec<f64>>,
    kind: VarianceKind,
) -> Result<VarianceEstimate> {
    let bread = invert_information(&(-hessian.clone()))?;
    let matrix = match kind {
        VarianceKind::Fisher => bread,
        VarianceKind::Sandwich { bandwidth } => sandwich(&bread, &hac_meat(&series.t_index, &rows, bandwidth)),
    };
    Ok(VarianceEstimate { kind, matrix, estimate: theta.to_vec() })
}

/// Two-variant series made of variants `keep.0` (incumbent) and `keep.1`
/// (emerging): `N_t = X_a + X_b`, `X_t = X_b`. Indices are zero-based.
pub fn marginalize(series: &MultiSeries, keep: (usize, usize)) -> Result<SurveillanceSeries> {
    let (a, b) = keep;
    let m = series.num_variants();
    if a == b || a >= m || b >= m {
        return Err(Error::InvalidIndex(format!("cannot keep ({a}, {b}) of {m} variants")));
    }
    let records = series
        .t_index
        .iter()
        .zip(&series.labels)
        .zip(&series.counts)
        .map(|((&t, label), c)| ObservationRecord::new(t, label.clone(), c[a] + c[b], c[b]))
        .collect();
    SurveillanceSeries::new(records, series.period_days)
}

/// Lifts a two-variant series into a `MultiSeries` with columns
/// `[incumbent, emerging]`.
pub fn from_binomial(series: &SurveillanceSeries, names: (&str, &str)) -> Result<MultiSeries> {
    let rows = series
        .records()
        .iter()
        .map(|r| (r.t_index, r.label.clone(), vec![r.sequenced - r.variant_count, r.variant_count]))
        .collect();
    MultiSeries::new(vec![names.0.to_string(), names.1.to_string()], rows, series.period_days())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::Dataset;
    use crate::dynamics::{step_lambda, Advantage, Proportion};
    use crate::estimation::{fit, log_likelihood};
    use proptest::prelude::*;

    fn ms(rows: &[(i64, &[u64])]) -> MultiSeries {
        let m = rows[0].1.len();
        MultiSeries::new(
            (0..m).map(|j| format!("v{j}")).collect(),
            rows.iter().map(|(t, c)| (*t, t.to_string(), c.to_vec())).collect(),
            7.0,
        )
        .unwrap()
    }

    #[test]
    fn step_examples() {
        let same = step_lambda_multi(&[0.2, 0.3, 0.5], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(same, vec![0.2, 0.3, 0.5]);
        let two = step_lambda_multi(&[0.9, 0.1], &[1.0, 1.86]).unwrap();
        let one = step_lambda(Proportion::new(0.1).unwrap(), Advantage::new(1.86, 7.0).unwrap());
        assert!((two[1] - one.value()).abs() < 1e-15);
        let three = step_lambda_multi(&[1.0 / 3.0; 3], &[1.0, 2.0, 3.0]).unwrap();
        for (got, want) in three.iter().zip([1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn binomial_reduction_on_alpha() {
        let s = Dataset::Alpha.series();
        let m = from_binomial(&s, ("other", "alpha")).unwrap();
        let mf = fit_multi(&m, &MultiOptions::default()).unwrap();
        let bf = fit(&s, &FitOptions::default()).unwrap();
        assert!((mf.params.alphas[0] - bf.params.alpha).abs() < 1e-8);
        assert!((mf.params.betas[0] - bf.params.beta).abs() < 1e-8);
        assert!((mf.params.gammas()[0] - 1.86).abs() < 5e-3);
        // identical up to a constant (here exactly, since both drop binomial coefficients)
        let ll_b = log_likelihood(&s, &bf.params);
        assert!((mf.log_likelihood - ll_b).abs() < 1e-6 * ll_b.abs());
    }

    #[test]
    fn fixed_shares_give_unit_advantages() {
        let s = ms(&[(1, &[500, 300, 200]), (2, &[250, 150, 100]), (3, &[1000, 600, 400]), (4, &[50, 30, 20])]);
        let f = fit_multi(&s, &MultiOptions::default()).unwrap();
        for g in f.params.gammas() {
            assert!((g - 1.0).abs() < 1e-8);
        }
        assert_eq!(f.variance.dim(), 4);
    }

    #[test]
    fn never_observed_variant_is_separation() {
        let s = ms(&[(1, &[5, 0, 2]), (2, &[5, 0, 3])]);
        assert!(matches!(fit_multi(&s, &MultiOptions::default()), Err(Error::Separation(_))));
        let single = ms(&[(1, &[5, 1, 2])]);
        assert!(matches!(fit_multi(&single, &MultiOptions::default()), Err(Error::Singular(_))));
    }

    #[test]
    fn marginalize_indices() {
        let s = ms(&[(1, &[5, 1, 2]), (2, &[4, 3, 3])]);
        assert!(matches!(marginalize(&s, (1, 1)), Err(Error::InvalidIndex(_))));
        assert!(matches!(marginalize(&s, (0, 3)), Err(Error::InvalidIndex(_))));
        let m = marginalize(&s, (0, 2)).unwrap();
        assert_eq!(m.records()[0].sequenced, 7);
        assert_eq!(m.records()[0].variant_count, 2);

        let b = Dataset::Delta.series();
        let two = from_binomial(&b, ("alpha", "delta")).unwrap();
        let back = marginalize(&two, (0, 1)).unwrap();
        for (x, y) in back.records().iter().zip(b.records()) {
            assert_eq!((x.t_index, x.sequenced, x.variant_count), (y.t_index, y.sequenced, y.variant_count));
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let text = "t,label,delta,alpha,beta,gamma\n1,fr,41,29,19,7\n2,fr2,50,25,17,8\n";
        let s = read_multi_csv(text.as_bytes(), 7.0).unwrap();
        assert_eq!(s.num_variants(), 4);
        assert_eq!(s.variants()[3], "gamma");
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
        let bad = "t,label,a,b\n1,x,3,-1\n";
        assert!(matches!(read_multi_csv(bad.as_bytes(), 7.0), Err(Error::ParseError { row: 2, .. })));
    }

    #[test]
    fn single_snapshot_is_valid_but_not_fittable() {
        // four-variant snapshot: Delta 41%, Alpha 29%, Beta 19%, Gamma 7%
        let text = "t,label,delta,alpha,beta,gamma\n1,2021-06-late,41,29,19,7\n";
        let s = read_multi_csv(text.as_bytes(), 7.0).unwrap();
        assert_eq!(s.len(), 1);
        assert!(matches!(fit_multi(&s, &MultiOptions::default()), Err(Error::Singular(_))));
    }

    #[test]
    fn score_matches_finite_differences() {
        let s = ms(&[(1, &[90, 8, 2]), (2, &[80, 14, 6]), (3, &[60, 25, 15]), (5, &[30, 40, 30])]);
        let params = MultiParams { alphas: vec![-2.0, -3.5], betas: vec![0.4, 0.7] };
        let g = multi_score(&s, &params);
        let h = multi_hessian(&s, &params);
        let theta = params.flat();
        let eps = 1e-6;
        for i in 0..theta.len() {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[i] += eps;
            dn[i] -= eps;
            let fd = (ll_flat(&s, &up) - ll_flat(&s, &dn)) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-5 * g[i].abs().max(1.0), "{i}: {fd} vs {}", g[i]);
            let gu = multi_score(&s, &MultiParams::from_flat(&up));
            let gd = multi_score(&s, &MultiParams::from_flat(&dn));
            for k in 0..theta.len() {
                let fdh = (gu[k] - gd[k]) / (2.0 * eps);
                assert!((fdh - h[(k, i)]).abs() < 1e-5 * h[(k, i)].abs().max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn simplex_preserved(raw in proptest::collection::vec(0.0f64..1.0, 2..8), gs in proptest::collection::vec(0.05f64..20.0, 8)) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-6);
            let l: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let out = step_lambda_multi(&l, &gs[..l.len()]).unwrap();
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(out.iter().all(|&x| x >= 0.0));
        }
    }
}
