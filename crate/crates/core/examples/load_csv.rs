//! Fit a series from a CSV file:
//!
//! ```text
//! cargo run --example load_csv -- series.csv [period_days]
//! ```
//!
//! Without arguments, the bundled Delta series is written to a temporary file
//! and read back.

use variant_advantage::robust::{interval_for_gamma, variance, VarianceKind};
use variant_advantage::{fit, load_csv, Dataset, FitOptions};

fn main() -> variant_advantage::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = match args.next() {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            let p = std::env::temp_dir().join("variant_advantage_delta.csv");
            std::fs::write(&p, Dataset::Delta.series().to_csv_string())?;
            println!("wrote {}", p.display());
            p
        }
    };
    let period_days = args.next().map(|d| d.parse().expect("period_days")).unwrap_or(7.0);

    let series = load_csv(&path, period_days)?;
    let f = fit(&series, &FitOptions::default())?;
    let k = 4.min(series.len() - 1);
    let v = variance(&series, &f, VarianceKind::Sandwich { bandwidth: k })?;
    let g = interval_for_gamma(&v, &f, 4.7, 0.95)?;
    println!(
        "{} periods, t = {}..{}: gamma per 4.7 days {:.3} [{:.3}, {:.3}] ({} iterations)",
        series.len(),
        series.first_t(),
        series.last_t(),
        g.gamma.value,
        g.ci_low,
        g.ci_high,
        f.iterations
    );
    Ok(())
}
