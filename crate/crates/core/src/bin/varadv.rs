use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use variant_advantage::crude::{crude_gammas, mean_value, proportion_intervals};
use variant_advantage::dynamics::{Advantage, Proportion, DEFAULT_GENERATION_DAYS};
use variant_advantage::forecast::{forecast, ForecastBand};
use variant_advantage::multivariant::{fit_multi, load_multi_csv, MultiOptions};
use variant_advantage::report::{fmt_num, Fields, InputDigest, RunReport};
use variant_advantage::repro::{infer_variant_r, lambda_grid, stability_region, write_contour_csv};
use variant_advantage::robust::{interval_for_gamma, param_intervals, variance, AdvantageEstimate, Composition};
use variant_advantage::simulation::{recovery_report, simulate, RecoveryOptions, SimConfig};
use variant_advantage::{fit, Dataset, Error, FitOptions, Result, SurveillanceSeries, VarianceKind};

#[derive(Parser)]
#[command(name = "varadv", version, about = "Relative contagiousness of emerging variants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the logistic model and report advantages with intervals.
    Estimate(EstimateArgs),
    /// Out-of-sample share forecasts with delta-method bands.
    Forecast(ForecastArgs),
    /// Reproduction number of the emerging variant, or its stability contour.
    InferR(InferRArgs),
    /// Per-period odds-ratio advantages and Wilson intervals.
    Crude(CrudeArgs),
    /// Draw a synthetic series, or run a recovery study.
    Simulate(SimulateArgs),
    /// Joint fit of three or more variants.
    Multi(MultiArgs),
}

#[derive(Args, Clone)]
struct Output {
    /// Emit a JSON run report.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV rows.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Clone)]
struct Inference {
    /// Days per period (defaults to the bundled dataset's period, else 7).
    #[arg(long)]
    period_days: Option<f64>,
    /// Generation time in days.
    #[arg(long, default_value_t = DEFAULT_GENERATION_DAYS)]
    gen_days: f64,
    /// HAC bandwidth K.
    #[arg(long, default_value_t = 4)]
    hac: usize,
    /// Use the inverse Fisher information instead of the HAC sandwich.
    #[arg(long)]
    fisher: bool,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

impl Inference {
    fn kind(&self) -> VarianceKind {
        if self.fisher {
            VarianceKind::Fisher
        } else {
            VarianceKind::Sandwich { bandwidth: self.hac }
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Bundled dataset (alpha, delta, omicron) or CSV path.
    input: String,
    #[command(flatten)]
    inference: Inference,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ForecastArgs {
    input: String,
    /// First training period (t value or label); defaults to the first row.
    #[arg(long)]
    train_from: Option<String>,
    /// Last training period (t value or label).
    #[arg(long)]
    train_through: String,
    /// Number of periods to forecast after the training window.
    #[arg(long, default_value_t = 10)]
    horizons: usize,
    /// Band multipliers.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 4.0])]
    c: Vec<f64>,
    #[command(flatten)]
    inference: Inference,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct InferRArgs {
    /// Aggregate reproduction number.
    #[arg(long = "R", allow_negative_numbers = true)]
    r_all: Option<f64>,
    /// Share of the emerging variant.
    #[arg(long)]
    lambda: Option<f64>,
    /// Advantage per generation.
    #[arg(long, conflicts_with = "from_fit")]
    gamma_gen: Option<f64>,
    /// Interval for --gamma-gen, as `low,high`.
    #[arg(long, value_delimiter = ',', num_args = 2, requires = "gamma_gen")]
    gamma_ci: Option<Vec<f64>>,
    /// JSON report written by `estimate --json`.
    #[arg(long)]
    from_fit: Option<PathBuf>,
    /// Stability contour grid over lambda, as `from:to:step`.
    #[arg(long)]
    contour: Option<String>,
    /// Write the contour CSV here instead of stdout.
    #[arg(long, requires = "contour")]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GENERATION_DAYS)]
    gen_days: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CrudeArgs {
    input: String,
    #[arg(long)]
    period_days: Option<f64>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SimulateArgs {
    /// Per-period advantage of each emerging variant over variant 1.
    #[arg(long, value_delimiter = ',', required = true)]
    gamma: Vec<f64>,
    /// Initial share of each emerging variant at t = 0.
    #[arg(long, value_delimiter = ',', required = true)]
    lambda0: Vec<f64>,
    /// Sequenced cases per period.
    #[arg(long)]
    n: u64,
    /// Number of periods.
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 7.0)]
    period_days: f64,
    /// Run a recovery study with this many replications instead of writing data.
    #[arg(long)]
    replications: Option<usize>,
    /// Write the series here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MultiArgs {
    /// CSV with columns `t,label,<variant>...`.
    #[arg(long)]
    file: PathBuf,
    #[command(flatten)]
    inference: Inference,
    #[command(flatten)]
    output: Output,
}

struct Loaded {
    series: SurveillanceSeries,
    digest: InputDigest,
}

fn load(input: &str, period_days: Option<f64>) -> Result<Loaded> {
    if let Ok(ds) = input.parse::<Dataset>() {
        let mut series = ds.series();
        if let Some(pd) = period_days {
            series = SurveillanceSeries::new(series.records().to_vec(), pd)?;
        }
        let digest = InputDigest::new(ds.name(), series.to_csv_string().as_bytes());
        return Ok(Loaded { series, digest });
    }
    let bytes = std::fs::read(input).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound if !input.contains(['/', '.']) => Error::UnknownDataset(input.into()),
        _ => Error::Io(format!("{input}: {e}")),
    })?;
    let series = variant_advantage::read_csv(bytes.as_slice(), period_days.unwrap_or(7.0))?;
    Ok(Loaded { series, digest: InputDigest::new(input, &bytes) })
}

fn resolve_t(series: &SurveillanceSeries, key: &str) -> Result<i64> {
    if let Some(r) = series.find_label(key) {
        return Ok(r.t_index);
    }
    key.parse::<i64>().map_err(|_| Error::WindowOutOfRange(format!("no period '{key}' in the series")))
}

#[derive(Serialize)]
struct GammaRow {
    quantity: String,
    estimate: f64,
    low: f64,
    high: f64,
}

fn gamma_row(name: &str, e: &AdvantageEstimate) -> GammaRow {
    GammaRow { quantity: name.into(), estimate: e.gamma.value, low: e.ci_low, high: e.ci_high }
}

fn emit(report: &RunReport, output: &Output, csv: impl FnOnce() -> String, human: impl FnOnce() -> String) {
    let text = if output.json {
        report.to_json() + "\n"
    } else if output.csv {
        csv()
    } else {
        human()
    };
    print!("{text}");
}

fn csv_of<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, r) in rows.iter().enumerate() {
        let v = serde_json::to_value(r).expect("row serialises");
        if let Value::Object(map) = v {
            if i == 0 {
                w.write_record(map.keys()).expect("in-memory write");
            }
            let cells: Vec<String> = map
                .values()
                .map(|v| match v {
                    Value::Number(n) => fmt_num(n.as_f64().unwrap_or(f64::NAN)),
                    Value::String(s) => s.clone(),
                    Value::Null => String::new(),
                    other => other.to_string(),
                })
                .collect();
            w.write_record(&cells).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    let inf = &a.inference;
    let Loaded { series, digest } = load(&a.input, inf.period_days)?;
    let f = fit(&series, &FitOptions::default())?;
    let v = variance(&series, &f, inf.kind())?;
    let (alpha, beta) = param_intervals(&v, &f, inf.level)?;
    let period = interval_for_gamma(&v, &f, series.period_days(), inf.level)?;
    let generation = interval_for_gamma(&v, &f, inf.gen_days, inf.level)?;
    let week = interval_for_gamma(&v, &f, 7.0, inf.level)?;
    let rows = vec![
        gamma_row("gamma_period", &period),
        gamma_row("gamma_generation", &generation),
        gamma_row("gamma_week", &week),
    ];
    let results = Fields::new()
        .with("periods", series.len())
        .with("alpha", alpha)
        .with("beta", beta)
        .with("log_likelihood", f.log_likelihood)
        .with("iterations", f.iterations)
        .with("variance", Fields::new().with("kind", v.kind).with("matrix", v.rows()).into_value())
        .with("gamma_period", period)
        .with("gamma_generation", generation)
        .with("gamma_week", week)
        .into_value();
    let options = Fields::new()
        .with("period_days", series.period_days())
        .with("gen_days", inf.gen_days)
        .with("variance", inf.kind())
        .with("level", inf.level)
        .into_value();
    let report = RunReport::new("estimate", options, Some(digest), results);
    emit(
        &report,
        &a.output,
        || csv_of(&rows),
        || {
            let mut s = format!(
                "{} periods, variance {}, level {}\nalpha = {:.4} (se {:.4})\nbeta  = {:.4} (se {:.4})\n",
                series.len(),
                v.kind,
                inf.level,
                alpha.estimate,
                alpha.std_error,
                beta.estimate,
                beta.std_error
            );
            for (label, e) in [
                (format!("per period ({} d)", series.period_days()), &period),
                (format!("per generation ({} d)", inf.gen_days), &generation),
                ("per week".to_string(), &week),
            ] {
                s += &format!("gamma {label:<24} {:.4} [{:.4}, {:.4}]\n", e.gamma.value, e.ci_low, e.ci_high);
            }
            s
        },
    );
    Ok(())
}

#[derive(Serialize)]
struct ForecastRow {
    c: f64,
    t: f64,
    label: Option<String>,
    point: f64,
    lower: f64,
    upper: f64,
    observed: Option<f64>,
}

fn cmd_forecast(a: ForecastArgs) -> Result<()> {
    let inf = &a.inference;
    let Loaded { series, digest } = load(&a.input, inf.period_days)?;
    let from = match &a.train_from {
        Some(k) => resolve_t(&series, k)?,
        None => series.first_t(),
    };
    let through = resolve_t(&series, &a.train_through)?;
    let train = series.window(from, through)?;
    let f = fit(&train, &FitOptions::default())?;
    let kind = match inf.kind() {
        VarianceKind::Sandwich { bandwidth } => VarianceKind::Sandwich { bandwidth: bandwidth.min(train.len() - 1) },
        k => k,
    };
    let v = variance(&train, &f, kind)?;
    let horizons = variant_advantage::forecast::horizons_after(train.last_t(), a.horizons);
    let bands: Vec<ForecastBand> = a.c.iter().map(|&c| forecast(&f, &v, &horizons, c)).collect::<Result<_>>()?;
    let rows: Vec<ForecastRow> = bands
        .iter()
        .flat_map(|b| {
            b.points.iter().map(|p| {
                let rec = series.find(p.t as i64);
                ForecastRow {
                    c: b.c,
                    t: p.t,
                    label: rec.map(|r| r.label.clone()),
                    point: p.point,
                    lower: p.lower,
                    upper: p.upper,
                    observed: rec.and_then(|r| r.proportion()),
                }
            })
        })
        .collect();
    let results = Fields::new()
        .with("train_from", from)
        .with("train_through", through)
        .with("gamma_period", f.gamma())
        .with("variance", kind)
        .with("bands", &rows)
        .into_value();
    let options = Fields::new()
        .with("horizons", a.horizons)
        .with("c", &a.c)
        .with("period_days", series.period_days())
        .into_value();
    let report = RunReport::new("forecast", options, Some(digest), results);
    emit(
        &report,
        &a.output,
        || csv_of(&rows),
        || {
            let mut s = format!(
                "trained on t = {from}..{through} ({} periods), gamma per period {:.4}, variance {kind}\n",
                train.len(),
                f.gamma()
            );
            s += &format!(
                "{:>5} {:>6} {:>10} {:>9} {:>9} {:>9} {:>9}\n",
                "c", "t", "label", "point", "lower", "upper", "observed"
            );
            for r in &rows {
                s += &format!(
                    "{:>5} {:>6} {:>10} {:>9.4} {:>9.4} {:>9.4} {:>9}\n",
                    r.c,
                    r.t,
                    r.label.as_deref().unwrap_or("-"),
                    r.point,
                    r.lower,
                    r.upper,
                    r.observed.map(|o| format!("{o:.4}")).unwrap_or_else(|| "-".into())
                );
            }
            s
        },
    );
    Ok(())
}

fn gamma_from_report(path: &PathBuf, gen_days: f64) -> Result<AdvantageEstimate> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let json: Value =
        serde_json::from_str(&text).map_err(|e| Error::ParseError { row: e.line() as u64, message: e.to_string() })?;
    let g = json
        .pointer("/results/gamma_generation")
        .ok_or_else(|| Error::InvalidArgument("report has no results.gamma_generation".into()))?;
    let est: AdvantageEstimate =
        serde_json::from_value(g.clone()).map_err(|e| Error::ParseError { row: 0, message: e.to_string() })?;
    if (est.gamma.period_days - gen_days).abs() > 1e-9 {
        return est.rescaled(gen_days);
    }
    Ok(est)
}

fn cmd_infer_r(a: InferRArgs) -> Result<()> {
    let gamma = match (&a.from_fit, a.gamma_gen) {
        (Some(p), _) => gamma_from_report(p, a.gen_days)?,
        (None, Some(g)) => {
            let (lo, hi) = match a.gamma_ci.as_deref() {
                Some([lo, hi]) => (*lo, *hi),
                _ => (g, g),
            };
            AdvantageEstimate {
                gamma: Advantage::new(g, a.gen_days)?,
                ci_low: lo,
                ci_high: hi,
                level: 0.95,
                log_std_error: 0.0,
                composition: Composition::Direct,
            }
        }
        (None, None) => return Err(Error::InvalidArgument("need --gamma-gen or --from-fit".into())),
    };
    let mut results = Fields::new().with("gamma_generation", gamma);
    let mut human = String::new();
    let mut csv = String::new();

    if let Some(r_all) = a.r_all {
        let lambda =
            a.lambda.ok_or_else(|| Error::InvalidArgument("--R needs --lambda".into())).and_then(Proportion::new)?;
        let inf = infer_variant_r(r_all, lambda, gamma.gamma)?;
        human += &format!("R_B = {:.6}\nR_A = {:.6}\n", inf.r_variant, inf.r_incumbent);
        csv += &format!(
            "r_all,lambda,gamma_gen,r_variant,r_incumbent\n{},{},{},{},{}\n",
            fmt_num(r_all),
            fmt_num(lambda.value()),
            fmt_num(gamma.gamma.value),
            fmt_num(inf.r_variant),
            fmt_num(inf.r_incumbent)
        );
        results = results.with("inference", inf);
    } else if a.contour.is_none() {
        return Err(Error::InvalidArgument("need --R and --lambda, or --contour".into()));
    }

    if let Some(grid) = &a.contour {
        let parts: Vec<f64> = grid
            .split(':')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad contour grid '{grid}'")))?;
        let [from, to, step] = parts[..] else {
            return Err(Error::InvalidArgument(format!("contour grid must be from:to:step, got '{grid}'")));
        };
        let points = stability_region(&gamma, &lambda_grid(from, to, step)?);
        let mut buf = Vec::new();
        write_contour_csv(&points, &mut buf)?;
        let text = String::from_utf8(buf).expect("utf-8");
        match &a.out {
            Some(p) => {
                std::fs::write(p, &text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                human += &format!("wrote {} contour rows to {}\n", points.len(), p.display());
            }
            None if !a.output.json => {
                human += &text;
                csv = text;
            }
            None => {}
        }
        results = results.with("contour", &points);
    }

    let options = Fields::new()
        .with("R", a.r_all)
        .with("lambda", a.lambda)
        .with("gen_days", a.gen_days)
        .with("contour", &a.contour)
        .into_value();
    let input = match &a.from_fit {
        Some(p) => Some(InputDigest::new(p.display().to_string(), &std::fs::read(p)?)),
        None => None,
    };
    let report = RunReport::new("infer-r", options, input, results.into_value());
    emit(&report, &a.output, || csv, || human);
    Ok(())
}

fn cmd_crude(a: CrudeArgs) -> Result<()> {
    let Loaded { series, digest } = load(&a.input, a.period_days)?;
    let measures = crude_gammas(&series, a.level)?;
    let props = proportion_intervals(&series, a.level)?;
    let mean = mean_value(&measures);
    let results = Fields::new().with("mean", mean).with("measures", &measures).with("proportions", &props).into_value();
    let options = Fields::new().with("level", a.level).with("period_days", series.period_days()).into_value();
    let report = RunReport::new("crude", options, Some(digest), results);
    emit(
        &report,
        &a.output,
        || csv_of(&measures),
        || {
            let mut s = format!("{:>6} {:>9} {:>9} {:>9}\n", "t", "gamma", "low", "high");
            for m in &measures {
                let mark = if m.corrected { " *" } else { "" };
                s += &format!("{:>6} {:>9.4} {:>9.4} {:>9.4}{mark}\n", m.t_index, m.value, m.ci_low, m.ci_high);
            }
            s += &format!("{} measures, mean {:.4}\n", measures.len(), mean);
            if measures.iter().any(|m| m.corrected) {
                s += "* zero cell, 0.5 added to each cell\n";
            }
            s
        },
    );
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    if a.gamma.len() != a.lambda0.len() {
        return Err(Error::InvalidConfig("--gamma and --lambda0 need the same number of values".into()));
    }
    let rest: f64 = a.lambda0.iter().sum();
    let config = SimConfig {
        gammas: a.gamma.clone(),
        initial: std::iter::once(1.0 - rest).chain(a.lambda0.iter().copied()).collect(),
        sequenced: vec![a.n; a.t],
        seed: a.seed,
        growth: None,
        initial_cases: 0.0,
        period_days: a.period_days,
    };
    if let Some(reps) = a.replications {
        let rep = recovery_report(&config, &RecoveryOptions { replications: reps, ..Default::default() })?;
        if a.json {
            let report = RunReport::new("simulate", &config, None, &rep);
            println!("{}", report.to_json());
        } else {
            println!(
                "{} of {} fits succeeded\nmean gamma {:.4} (true {}), relative bias {:.2e}\ncoverage {:.3}, mean CI width {:.4}",
                rep.successful, rep.replications, rep.mean_gamma, rep.true_gamma, rep.relative_bias, rep.coverage, rep.mean_ci_width
            );
        }
        return Ok(());
    }
    let sim = simulate(&config)?;
    let mut buf = Vec::new();
    if config.num_variants() == 2 {
        sim.two_variant()?.write_csv(&mut buf)?;
    } else {
        sim.series.write_csv(&mut buf)?;
    }
    match &a.out {
        Some(p) => std::fs::write(p, &buf).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct VariantRow {
    variant: String,
    gamma_period: f64,
    low: f64,
    high: f64,
    gamma_generation: f64,
}

fn cmd_multi(a: MultiArgs) -> Result<()> {
    let inf = &a.inference;
    let bytes = std::fs::read(&a.file).map_err(|e| Error::Io(format!("{}: {e}", a.file.display())))?;
    let series = load_multi_csv(&a.file, inf.period_days.unwrap_or(7.0))?;
    let mf = fit_multi(&series, &MultiOptions { variance: inf.kind(), ..Default::default() })?;
    let z = variant_advantage::robust::z_for_level(inf.level)?;
    let pd = series.period_days();
    let rows: Vec<VariantRow> = (1..series.num_variants())
        .map(|j| {
            let b = mf.params.betas[j - 1];
            let se = mf.variance.std_error(2 * (j - 1) + 1);
            VariantRow {
                variant: series.variants()[j].clone(),
                gamma_period: b.exp(),
                low: (b - z * se).exp(),
                high: (b + z * se).exp(),
                gamma_generation: (b * inf.gen_days / pd).exp(),
            }
        })
        .collect();
    let results = Fields::new()
        .with("reference", &series.variants()[0])
        .with("variants", &rows)
        .with("log_likelihood", mf.log_likelihood)
        .with("iterations", mf.iterations)
        .into_value();
    let options = Fields::new()
        .with("period_days", pd)
        .with("gen_days", inf.gen_days)
        .with("variance", inf.kind())
        .with("level", inf.level)
        .into_value();
    let digest = InputDigest::new(a.file.display().to_string(), &bytes);
    let report = RunReport::new("multi", options, Some(digest), results);
    emit(
        &report,
        &a.output,
        || csv_of(&rows),
        || {
            let mut s = format!("reference variant: {} ({} periods)\n", series.variants()[0], series.len());
            s += &format!("{:<14} {:>9} {:>9} {:>9} {:>11}\n", "variant", "gamma", "low", "high", "per gen");
            for r in &rows {
                s += &format!(
                    "{:<14} {:>9.4} {:>9.4} {:>9.4} {:>11.4}\n",
                    r.variant, r.gamma_period, r.low, r.high, r.gamma_generation
                );
            }
            s
        },
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Forecast(a) => cmd_forecast(a),
        Command::InferR(a) => cmd_infer_r(a),
        Command::Crude(a) => cmd_crude(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Multi(a) => cmd_multi(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
