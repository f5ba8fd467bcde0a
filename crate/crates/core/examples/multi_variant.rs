//! Three variants competing at once: simulate, fit jointly, and check that
//! the pairwise two-variant fit on the marginal counts agrees.

use variant_advantage::multivariant::{fit_multi, marginalize, MultiOptions};
use variant_advantage::simulation::{simulate, SimConfig};
use variant_advantage::{fit, FitOptions};

fn main() -> variant_advantage::Result<()> {
    let config = SimConfig {
        gammas: vec![1.4, 2.2],
        initial: vec![0.94, 0.05, 0.01],
        sequenced: vec![2500; 14],
        seed: 2024,
        growth: None,
        initial_cases: 0.0,
        period_days: 7.0,
    };
    let series = simulate(&config)?.series;
    let joint = fit_multi(&series, &MultiOptions::default())?;
    // gammas()[j] is variant j+1 against the reference variant 0
    let g = joint.params.gammas();
    for (j, gj) in g.iter().enumerate() {
        let se = joint.variance.std_error(2 * j + 1);
        println!("{}: gamma {:.3} (true {}), se(beta) {:.4}", series.variants()[j + 1], gj, config.gammas[j], se);
    }

    let pair = marginalize(&series, (1, 2))?;
    let f = fit(&pair, &FitOptions::default())?;
    println!("variant 3 vs variant 2: pairwise {:.3}, from joint fit {:.3}", f.gamma(), g[1] / g[0]);
    Ok(())
}
