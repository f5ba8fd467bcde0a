//! Relative contagiousness of an emerging virus variant from sequenced case
//! counts.
//!
//! The variant share `lambda_t` of a constant-advantage two-variant process
//! is logistic in time, so the per-period advantage `gamma = exp(beta)` is
//! estimated by a binomial logistic fit of variant counts on sequenced
//! counts. Around that core:
//!
//! - [`robust`]: Fisher and HAC sandwich variances, advantage intervals and
//!   composition of advantages across variants.
//! - [`crude`]: per-period odds ratios and Wilson intervals.
//! - [`forecast`]: delta-method bands for the share.
//! - [`repro`]: reproduction numbers of each variant and stability contours.
//! - [`multivariant`]: multinomial-logistic fit for `m > 2` variants.
//! - [`simulation`]: seeded synthetic data and parameter recovery studies.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```text
//! cargo run --example estimate_alpha_delta
//! cargo run --example omicron_daily
//! cargo run --example sensitivity_table
//! cargo run --example crude_measures
//! cargo run --example forecast_bands
//! cargo run --example infer_reproduction
//! cargo run --example multi_variant
//! cargo run --example simulate_recovery
//! cargo run --example load_csv -- path/to/series.csv
//! ```
//!
//! ```
//! use variant_advantage::{fit, Dataset, FitOptions};
//!
//! let series = Dataset::Alpha.series();
//! let f = fit(&series, &FitOptions::default()).unwrap();
//! assert!((f.params.beta - 0.6186).abs() < 1e-3);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crude;
pub mod data;
pub mod datasets;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod forecast;
pub mod multivariant;
pub mod report;
pub mod repro;
pub mod robust;
pub mod simulation;

pub use data::{load_csv, read_csv, ModelParams, ObservationRecord, SurveillanceSeries};
pub use datasets::{load_bundled, Dataset};
pub use dynamics::{Advantage, Proportion};
pub use error::{Error, Result};
pub use estimation::{fit, FitOptions, FitResult};
pub use forecast::{forecast, ForecastBand};
pub use multivariant::{fit_multi, MultiFit, MultiOptions, MultiSeries};
pub use robust::{
    compose_advantages, interval_for_gamma, variance, AdvantageEstimate, Composition, VarianceEstimate, VarianceKind,
};
pub use simulation::{recovery_report, simulate, SimConfig};
