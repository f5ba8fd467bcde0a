//! Reproduction numbers of each variant from the aggregate R, and the region
//! of (share, R) where the emerging variant still grows.

use variant_advantage::dynamics::{Advantage, Proportion};
use variant_advantage::repro::{
    infer_variant_r, lambda_grid, r_threshold, reproduction_points, stability_region, AdjustedROptions,
};
use variant_advantage::robust::{interval_for_gamma, variance, VarianceKind};
use variant_advantage::{fit, Dataset, FitOptions};

fn main() -> variant_advantage::Result<()> {
    let r = infer_variant_r(0.9, Proportion::new(0.5)?, Advantage::new(1.5, 4.7)?)?;
    println!("R = 0.9, share 0.5, gamma 1.5 -> R_B = {:.3}, R_A = {:.3}", r.r_variant, r.r_incumbent);

    let s = Dataset::Alpha.series();
    let f = fit(&s, &FitOptions::default())?;
    let v = variance(&s, &f, VarianceKind::Sandwich { bandwidth: 4 })?;
    let gamma = interval_for_gamma(&v, &f, 4.7, 0.95)?;

    println!("\nweek       share   R(adjusted)  threshold  R_B");
    for p in reproduction_points(&s, &AdjustedROptions::default())? {
        let label = &s.find(p.t_index).unwrap().label;
        let thr = r_threshold(p.proportion, gamma.gamma.value);
        let rb = infer_variant_r(p.r_hat, Proportion::new(p.proportion)?, gamma.gamma)?;
        println!("{label}  {:.4}  {:>10.3}  {:>9.3}  {:.3}", p.proportion, p.r_hat, thr, rb.r_variant);
    }

    println!("\nstability boundary (R below which the variant shrinks):");
    for pt in stability_region(&gamma, &lambda_grid(0.0, 1.0, 0.25)?) {
        println!("  share {:.2}: {:.3} [{:.3}, {:.3}]", pt.lambda, pt.threshold, pt.lo, pt.hi);
    }
    Ok(())
}
