//! Period-to-period odds ratios as a model-free check on the fitted
//! advantage, with Wilson intervals for the observed shares.

use variant_advantage::crude::{crude_gammas, mean_value, proportion_intervals};
use variant_advantage::{fit, Dataset, FitOptions};

fn main() -> variant_advantage::Result<()> {
    for ds in Dataset::ALL {
        let s = ds.series();
        let crude = crude_gammas(&s, 0.95)?;
        let f = fit(&s, &FitOptions::default())?;
        println!(
            "{ds}: {} crude measures, mean {:.2}, fitted gamma per period {:.2}",
            crude.len(),
            mean_value(&crude),
            f.gamma()
        );
    }

    let s = Dataset::Alpha.series();
    println!("\nalpha, per week:");
    let props = proportion_intervals(&s, 0.95)?;
    for (m, p) in crude_gammas(&s, 0.95)?.iter().zip(props.iter().skip(1)) {
        println!(
            "  t={:>2}  share {:.4} [{:.4}, {:.4}]  gamma {:.3} [{:.3}, {:.3}]",
            m.t_index, p.proportion, p.ci_low, p.ci_high, m.value, m.ci_low, m.ci_high
        );
    }
    Ok(())
}
