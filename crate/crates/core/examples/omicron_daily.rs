//! Omicron vs Delta on daily data. The fit is per day; the advantage is then
//! expressed per generation and per week.

use variant_advantage::robust::{interval_for_gamma, param_intervals, variance, VarianceKind};
use variant_advantage::{fit, Dataset, FitOptions};

fn main() -> variant_advantage::Result<()> {
    let s = Dataset::Omicron.series();
    assert_eq!(s.period_days(), 1.0);
    let f = fit(&s, &FitOptions::default())?;
    let v = variance(&s, &f, VarianceKind::Sandwich { bandwidth: 4 })?;
    let (a, b) = param_intervals(&v, &f, 0.95)?;
    println!("alpha {:.2} [{:.2}, {:.2}]", a.estimate, a.low, a.high);
    println!("beta  {:.3} [{:.3}, {:.3}]", b.estimate, b.low, b.high);
    for days in [1.0, 4.7, 7.0] {
        let g = interval_for_gamma(&v, &f, days, 0.95)?;
        println!("gamma per {days} days: {:.2} [{:.2}, {:.2}]", g.gamma.value, g.ci_low, g.ci_high);
    }

    println!("\nday        observed  fitted");
    for (r, (_, fitted)) in s.records().iter().zip(&f.fitted) {
        println!("{}  {:>7.4}  {:>6.4}", r.label, r.proportion().unwrap_or(f64::NAN), fitted);
    }
    Ok(())
}
