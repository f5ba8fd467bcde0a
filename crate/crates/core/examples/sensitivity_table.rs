//! How the 95% interval for the per-generation advantage moves with the
//! variance estimator: inverse Fisher information, then HAC sandwiches with
//! Parzen bandwidth K = 0..6.

use variant_advantage::robust::{interval_for_gamma, variance, VarianceKind};
use variant_advantage::{fit, Dataset, FitOptions};

fn main() -> variant_advantage::Result<()> {
    let kinds: Vec<VarianceKind> =
        std::iter::once(VarianceKind::Fisher).chain((0..=6).map(|k| VarianceKind::Sandwich { bandwidth: k })).collect();

    println!("{:<16} {:>20} {:>20}", "estimator", "alpha", "delta");
    let fits: Vec<_> = [Dataset::Alpha, Dataset::Delta]
        .into_iter()
        .map(|d| {
            let s = d.series();
            let f = fit(&s, &FitOptions::default()).unwrap();
            (s, f)
        })
        .collect();
    for kind in kinds {
        let mut line = format!("{:<16}", kind.to_string());
        for (s, f) in &fits {
            let v = variance(s, f, kind)?;
            let ci = interval_for_gamma(&v, f, 4.7, 0.95)?;
            line += &format!("      [{:.4}, {:.4}]", ci.ci_low, ci.ci_high);
        }
        println!("{line}");
    }
    Ok(())
}
