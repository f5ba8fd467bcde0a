//! Synthetic sequencing data from the constant-advantage model.
//!
//! Shares start at `initial` at `t = 0` and follow the multi-variant share
//! recursion; period `t = 1..=T` draws `N_t` sequenced cases from a
//! multinomial with the current shares (sequential exact binomials).
//!
//! RNG: ChaCha8 seeded with `seed`; replication `r` of a recovery study uses
//! stream `r` of the same seed, so each replication is reproducible on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{ObservationRecord, SurveillanceSeries};
use crate::error::{Error, Result};
use crate::estimation::{fit, FitOptions};
use crate::multivariant::{step_lambda_multi, MultiSeries};
use crate::robust::{interval_for_gamma, variance, VarianceKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    /// Per-period advantages of variants `1..m` relative to variant 0.
    pub gammas: Vec<f64>,
    /// Shares of all `m` variants at `t = 0`.
    pub initial: Vec<f64>,
    /// Sequenced cases `N_t` for `t = 1..=T`.
    pub sequenced: Vec<u64>,
    pub seed: u64,
    /// Growth factor `a_t` of the numéraire variant's case count, one per period.
    pub growth: Option<Vec<f64>>,
    /// Total cases at `t = 0`; used only with `growth`.
    pub initial_cases: f64,
    pub period_days: f64,
}

impl SimConfig {
    /// Two-variant configuration with a constant sequencing volume.
    pub fn two_variant(gamma: f64, lambda0: f64, n: u64, periods: usize, seed: u64) -> Self {
        SimConfig {
            gammas: vec![gamma],
            initial: vec![1.0 - lambda0, lambda0],
            sequenced: vec![n; periods],
            seed,
            growth: None,
            initial_cases: 0.0,
            period_days: 7.0,
        }
    }

    pub fn num_variants(&self) -> usize {
        self.initial.len()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.initial.len() < 2 {
            return bad("need at least 2 variants".into());
        }
        if self.gammas.len() + 1 != self.initial.len() {
            return bad(format!("{} advantages for {} variants (expected m-1)", self.gammas.len(), self.initial.len()));
        }
        if self.gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return bad("advantages must be positive and finite".into());
        }
        if self.initial.iter().any(|l| !(*l >= 0.0)) || (self.initial.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("initial shares must form a simplex".into());
        }
        if self.sequenced.is_empty() {
            return bad("need at least one period".into());
        }
        if !(self.period_days > 0.0) {
            return bad("period_days must be positive".into());
        }
        if let Some(g) = &self.growth {
            if g.len() != self.sequenced.len() {
                return bad("growth schedule length must equal the number of periods".into());
            }
            if g.iter().any(|a| !(*a > 0.0)) || !(self.initial_cases > 0.0) {
                return bad("growth factors and initial cases must be positive".into());
            }
        }
        Ok(())
    }

    fn all_gammas(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.gammas.iter().copied()).collect()
    }

    /// Expected shares at `t = 1..=T`.
    pub fn expected_shares(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let g = self.all_gammas();
        let mut cur = self.initial.clone();
        let mut out = Vec::with_capacity(self.sequenced.len());
        for _ in 0..self.sequenced.len() {
            cur = step_lambda_multi(&cur, &g)?;
            out.push(cur.clone());
        }
        Ok(out)
    }
}

/// Simulation output with optional total case counts per period.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub series: MultiSeries,
    pub total_cases: Option<Vec<u64>>,
}

impl Simulated {
    /// Two-variant view (`m = 2` only).
    pub fn two_variant(&self) -> Result<SurveillanceSeries> {
        let s = &self.series;
        if s.num_variants() != 2 {
            return Err(Error::InvalidConfig("two-variant view needs m = 2".into()));
        }
        let mut records = Vec::with_capacity(s.len());
        for (i, ((&t, label), c)) in s.t_index().iter().zip(s.labels()).zip(s.counts()).enumerate() {
            let mut r = ObservationRecord::new(t, label.clone(), c[0] + c[1], c[1]);
            r.total_cases = self.total_cases.as_ref().map(|tc| tc[i]);
            records.push(r);
        }
        SurveillanceSeries::new(records, s.period_days())
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw of the sequencing process. Periods with `N_t = 0` are dropped
/// from the multi-variant series (they carry no information).
pub fn simulate(config: &SimConfig) -> Result<Simulated> {
    simulate_stream(config, 0)
}

pub fn simulate_stream(config: &SimConfig, stream: u64) -> Result<Simulated> {
    let shares = config.expected_shares()?;
    let mut rng = rng_for(config.seed, stream);
    let m = config.num_variants();
    let gammas = config.all_gammas();

    let mut rows = Vec::with_capacity(shares.len());
    let mut totals = Vec::with_capacity(shares.len());
    let mut cases: Vec<f64> = config.initial.iter().map(|l| l * config.initial_cases).collect();

    for (i, (lam, &n)) in shares.iter().zip(&config.sequenced).enumerate() {
        let t = i as i64 + 1;
        let mut counts = vec![0u64; m];
        let mut left = n;
        let mut mass = 1.0;
        for j in 0..m {
            if j == m - 1 || left == 0 {
                counts[j] = left;
                break;
            }
            let p = (lam[j] / mass).clamp(0.0, 1.0);
            let x = Binomial::new(left, p).map_err(|e| Error::InvalidConfig(e.to_string()))?.sample(&mut rng);
            counts[j] = x;
            left -= x;
            mass -= lam[j];
        }
        if let Some(growth) = &config.growth {
            for (c, g) in cases.iter_mut().zip(&gammas) {
                *c *= g * growth[i];
            }
            let total = cases.iter().sum::<f64>().round() as u64;
            if total < n {
                return Err(Error::InvalidConfig(format!("period {t}: {total} total cases but {n} sequenced")));
            }
            totals.push(total);
        }
        rows.push((t, format!("t{t}"), counts));
    }
    let names = (0..m).map(|j| format!("variant_{}", j + 1)).collect();
    let keep: Vec<bool> = config.sequenced.iter().map(|&n| n > 0).collect();
    let total_cases =
        config.growth.as_ref().map(|_| totals.iter().zip(&keep).filter(|(_, k)| **k).map(|(t, _)| *t).collect());
    Ok(Simulated { series: MultiSeries::new(names, rows, config.period_days)?, total_cases })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveryOptions {
    pub replications: usize,
    pub variance: VarianceKind,
    pub level: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions { replications: 100, variance: VarianceKind::Fisher, level: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub true_gamma: f64,
    pub replications: usize,
    pub successful: usize,
    pub failed: usize,
    pub mean_gamma: f64,
    /// `(mean gamma_hat - gamma) / gamma`.
    pub relative_bias: f64,
    /// Share of successful fits whose interval covers the true advantage.
    pub coverage: f64,
    pub mean_ci_width: f64,
    pub estimates: Vec<f64>,
}

/// Repeated simulate-and-fit for a two-variant configuration.
pub fn recovery_report(config: &SimConfig, options: &RecoveryOptions) -> Result<RecoveryReport> {
    if options.replications == 0 {
        return Err(Error::InvalidConfig("need at least one replication".into()));
    }
    if config.num_variants() != 2 {
        return Err(Error::InvalidConfig("recovery study is for two variants".into()));
    }
    config.validate()?;
    let true_gamma = config.gammas[0];
    let outcomes: Vec<Option<(f64, f64, f64)>> = (0..options.replications as u64)
        .into_par_iter()
        .map(|r| {
            let sim = simulate_stream(config, r).ok()?;
            let series = sim.two_variant().ok()?;
            let f = fit(&series, &FitOptions::default()).ok()?;
            let v = variance(&series, &f, options.variance).ok()?;
            let ci = interval_for_gamma(&v, &f, config.period_days, options.level).ok()?;
            Some((ci.gamma.value, ci.ci_low, ci.ci_high))
        })
        .collect();
    let ok: Vec<_> = outcomes.iter().flatten().copied().collect();
    let k = ok.len() as f64;
    let mean_gamma = ok.iter().map(|o| o.0).sum::<f64>() / k;
    Ok(RecoveryReport {
        true_gamma,
        replications: options.replications,
        successful: ok.len(),
        failed: options.replications - ok.len(),
        mean_gamma,
        relative_bias: (mean_gamma - true_gamma) / true_gamma,
        coverage: ok.iter().filter(|o| o.1 <= true_gamma && true_gamma <= o.2).count() as f64 / k,
        mean_ci_width: ok.iter().map(|o| o.2 - o.1).sum::<f64>() / k,
        estimates: ok.iter().map(|o| o.0).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_series() {
        let cfg = SimConfig::two_variant(1.86, 0.003, 3000, 18, 7);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        a.series.write_csv(&mut ba).unwrap();
        b.series.write_csv(&mut bb).unwrap();
        assert_eq!(ba, bb);
        let c = simulate(&SimConfig { seed: 8, ..cfg.clone() }).unwrap();
        assert_ne!(a, c);
        assert_ne!(simulate_stream(&cfg, 1).unwrap(), a);
    }

    #[test]
    fn counts_are_consistent() {
        let cfg = SimConfig {
            gammas: vec![1.5, 3.0],
            initial: vec![0.9, 0.08, 0.02],
            sequenced: vec![500, 0, 800, 1200],
            seed: 3,
            growth: Some(vec![1.1, 0.9, 1.0, 1.2]),
            initial_cases: 10_000.0,
            period_days: 7.0,
        };
        let sim = simulate(&cfg).unwrap();
        assert_eq!(sim.series.len(), 3);
        assert_eq!(sim.series.t_index(), &[1, 3, 4]);
        let totals: Vec<u64> = sim.series.totals().collect();
        assert_eq!(totals, vec![500, 800, 1200]);
        assert_eq!(sim.total_cases.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn total_cases_follow_growth() {
        let cfg = SimConfig {
            growth: Some(vec![2.0, 0.5]),
            initial_cases: 1000.0,
            sequenced: vec![10, 10],
            ..SimConfig::two_variant(3.0, 0.5, 10, 2, 1)
        };
        let sim = simulate(&cfg).unwrap();
        // t=1: 500*2 + 500*3*2 = 4000; t=2: 1000*0.5 + 3000*3*0.5 = 5000
        assert_eq!(sim.total_cases.unwrap(), vec![4000, 5000]);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = SimConfig::two_variant(1.5, 0.1, 100, 5, 1);
        cfg.gammas = vec![-1.0];
        assert!(matches!(simulate(&cfg), Err(Error::InvalidConfig(_))));
        cfg.gammas = vec![1.5, 2.0];
        assert!(matches!(simulate(&cfg), Err(Error::InvalidConfig(_))));
        let mut cfg = SimConfig::two_variant(1.5, 0.1, 100, 5, 1);
        cfg.initial = vec![0.5, 0.6];
        assert!(matches!(simulate(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn null_advantage_is_not_detected() {
        let cfg = SimConfig::two_variant(1.0, 0.5, 1000, 10, 11);
        let s = simulate(&cfg).unwrap().two_variant().unwrap();
        let f = fit(&s, &FitOptions::default()).unwrap();
        let v = variance(&s, &f, VarianceKind::Fisher).unwrap();
        assert!(f.params.beta.abs() < 3.0 * v.std_error(1));
    }

    #[test]
    fn single_replication_report_is_the_fit() {
        let cfg = SimConfig::two_variant(1.86, 0.003, 3000, 18, 5);
        let rep = recovery_report(&cfg, &RecoveryOptions { replications: 1, ..Default::default() }).unwrap();
        let s = simulate(&cfg).unwrap().two_variant().unwrap();
        let f = fit(&s, &FitOptions::default()).unwrap();
        assert_eq!(rep.successful, 1);
        assert_eq!(rep.mean_gamma, f.gamma());
        assert_eq!(rep.estimates, vec![f.gamma()]);
    }
}
