#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use variant_advantage::estimation::{hessian, log_likelihood, score};
use variant_advantage::multivariant::MultiSeries;
use variant_advantage::{ModelParams, ObservationRecord, SurveillanceSeries};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Binomial draws around a logistic path with random parameters.
pub fn random_series(rng: &mut ChaCha8Rng, periods: usize, max_n: u64) -> (SurveillanceSeries, ModelParams) {
    let alpha = rng.random_range(-5.0..1.0);
    let beta = rng.random_range(-0.4..0.9);
    let t0: i64 = rng.random_range(-3..5);
    let records = (0..periods as i64)
        .map(|i| {
            let t = t0 + i;
            let n = rng.random_range(1..=max_n);
            let p = logistic(alpha + beta * t as f64);
            let x = Binomial::new(n, p).unwrap().sample(rng);
            ObservationRecord::new(t, format!("p{t}"), n, x)
        })
        .collect();
    (SurveillanceSeries::new(records, 7.0).unwrap(), ModelParams { alpha, beta })
}

/// Central differences of the log-likelihood and of the score.
pub fn finite_differences(series: &SurveillanceSeries, p: &ModelParams) -> ([f64; 2], [[f64; 2]; 2]) {
    let h = [1e-5 * (1.0 + p.alpha.abs()), 1e-6 * (1.0 + p.beta.abs())];
    let bump = |i: usize, d: f64| {
        let mut q = *p;
        if i == 0 {
            q.alpha += d;
        } else {
            q.beta += d;
        }
        q
    };
    let mut g = [0.0; 2];
    let mut hs = [[0.0; 2]; 2];
    for i in 0..2 {
        g[i] = (log_likelihood(series, &bump(i, h[i])) - log_likelihood(series, &bump(i, -h[i]))) / (2.0 * h[i]);
        let sp = score(series, &bump(i, h[i]));
        let sm = score(series, &bump(i, -h[i]));
        for j in 0..2 {
            hs[j][i] = (sp[j] - sm[j]) / (2.0 * h[i]);
        }
    }
    (g, hs)
}

/// Largest relative discrepancy between analytic and numerical derivatives.
pub fn derivative_error(series: &SurveillanceSeries, p: &ModelParams) -> f64 {
    let (g, h) = finite_differences(series, p);
    let sa = score(series, p);
    let ha = hessian(series, p);
    let gs = sa.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let hsc = ha.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut err = 0.0f64;
    for i in 0..2 {
        err = err.max((g[i] - sa[i]).abs() / gs);
        for j in 0..2 {
            err = err.max((h[i][j] - ha[i][j]).abs() / hsc);
        }
    }
    err
}

/// Derivative-free maximiser: a 41x41 grid that is repeatedly recentred on
/// its best point and shrunk. Relies only on concavity of the likelihood.
pub fn grid_search(series: &SurveillanceSeries) -> ModelParams {
    let (mut ca, mut cb) = (0.0, 0.0);
    let (mut ra, mut rb) = (30.0, 4.0);
    while ra > 1e-7 {
        let mut best = (f64::NEG_INFINITY, ca, cb);
        for i in -20..=20 {
            for j in -20..=20 {
                let a = ca + ra * i as f64 / 20.0;
                let b = cb + rb * j as f64 / 20.0;
                let ll = log_likelihood(series, &ModelParams { alpha: a, beta: b });
                if ll > best.0 {
                    best = (ll, a, b);
                }
            }
        }
        ca = best.1;
        cb = best.2;
        ra /= 4.0;
        rb /= 4.0;
    }
    ModelParams { alpha: ca, beta: cb }
}

/// Expected counts `N * lambda_{j,t}` of a three-variant process, rounded.
/// With large `n` the rounding is far below any tolerance of interest.
pub fn expected_three_variant(alphas: [f64; 2], betas: [f64; 2], periods: i64, n: f64) -> MultiSeries {
    let rows = (1..=periods)
        .map(|t| {
            let e = [0.0, alphas[0] + betas[0] * t as f64, alphas[1] + betas[1] * t as f64];
            let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = e.iter().map(|x| (x - m).exp()).collect();
            let s: f64 = w.iter().sum();
            (t, format!("t{t}"), w.iter().map(|x| (n * x / s).round() as u64).collect())
        })
        .collect();
    MultiSeries::new(vec!["a".into(), "b".into(), "c".into()], rows, 7.0).unwrap()
}
