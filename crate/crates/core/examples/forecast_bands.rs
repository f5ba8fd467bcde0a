//! Fit Alpha on the first weeks of its rise and project the share forward,
//! comparing bands from training windows of 4, 6, 8 and 10 weeks.

use variant_advantage::forecast::{forecast, horizons_after};
use variant_advantage::robust::{variance, VarianceKind};
use variant_advantage::{fit, Dataset, FitOptions};

fn main() -> variant_advantage::Result<()> {
    let all = Dataset::Alpha.series();
    let from = all.find_label("2020-W50").expect("week 50").t_index;
    for weeks in [4, 6, 8, 10] {
        let train = all.window(from, from + weeks - 1)?;
        let f = fit(&train, &FitOptions::default())?;
        let k = 4.min(train.len() - 1);
        let v = variance(&train, &f, VarianceKind::Sandwich { bandwidth: k })?;
        let band = forecast(&f, &v, &horizons_after(train.last_t(), 10), 4.0)?;
        println!("{weeks:>2} weeks through {}: gamma {:.2}", train.records().last().unwrap().label, f.gamma());
        for p in &band.points {
            let obs = all.find(p.t as i64).and_then(|r| r.proportion());
            let shown = obs.map(|o| format!("{o:.3}")).unwrap_or_else(|| "  -  ".into());
            println!("   t={:>2}  {:.3} [{:.3}, {:.3}]  observed {shown}", p.t, p.point, p.lower, p.upper);
        }
    }
    Ok(())
}
