//! Does the estimator recover a known advantage, and do its 95% intervals
//! cover it about 95% of the time?

use variant_advantage::robust::VarianceKind;
use variant_advantage::simulation::{recovery_report, RecoveryOptions, SimConfig};

fn main() -> variant_advantage::Result<()> {
    let config = SimConfig::two_variant(1.86, 0.003, 3000, 18, 7);
    for variance in [VarianceKind::Fisher, VarianceKind::Sandwich { bandwidth: 4 }] {
        let rep = recovery_report(&config, &RecoveryOptions { replications: 400, variance, level: 0.95 })?;
        println!(
            "{variance}: {}/{} fits, mean gamma {:.4}, bias {:+.1e}, coverage {:.3}, width {:.4}",
            rep.successful, rep.replications, rep.mean_gamma, rep.relative_bias, rep.coverage, rep.mean_ci_width
        );
    }
    Ok(())
}
