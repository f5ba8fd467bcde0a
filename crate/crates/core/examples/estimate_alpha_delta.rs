//! Advantage of Alpha over the ancestral lineage and of Delta over Alpha,
//! chained into Delta vs ancestral.

use variant_advantage::robust::{compose_advantages, interval_for_gamma, variance, Composition, VarianceKind};
use variant_advantage::{fit, Dataset, FitOptions};

fn main() -> variant_advantage::Result<()> {
    let hac = VarianceKind::Sandwich { bandwidth: 4 };
    let mut per_week = Vec::new();
    let mut per_gen = Vec::new();
    for ds in [Dataset::Alpha, Dataset::Delta] {
        let s = ds.series();
        let f = fit(&s, &FitOptions::default())?;
        let v = variance(&s, &f, hac)?;
        let week = interval_for_gamma(&v, &f, 7.0, 0.95)?;
        let gen = interval_for_gamma(&v, &f, 4.7, 0.95)?;
        println!(
            "{ds:<6} alpha {:>8.4}  beta {:.4}  gamma/week {:.2} [{:.2}, {:.2}]  gamma/4.7d {:.2} [{:.2}, {:.2}]",
            f.params.alpha,
            f.params.beta,
            week.gamma.value,
            week.ci_low,
            week.ci_high,
            gen.gamma.value,
            gen.ci_low,
            gen.ci_high
        );
        per_week.push(week);
        per_gen.push(gen);
    }

    for rule in [Composition::LogNormalSum, Composition::EndpointProduct] {
        let w = compose_advantages(&per_week[0], &per_week[1], rule)?;
        let g = compose_advantages(&per_gen[0], &per_gen[1], rule)?;
        println!(
            "delta vs ancestral ({rule:?}): week {:.2} [{:.2}, {:.2}], 4.7d {:.2} [{:.2}, {:.2}]",
            w.gamma.value, w.ci_low, w.ci_high, g.gamma.value, g.ci_low, g.ci_high
        );
    }
    Ok(())
}
