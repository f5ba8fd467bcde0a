//! Surveillance series: validated per-period sequencing counts.
//!
//! A series is a list of [`ObservationRecord`]s keyed by an integer period
//! index `t`. The index is data-driven, so gaps (missing weeks or days) are
//! representable and every downstream computation uses `t` directly rather
//! than the row position.
//!
//! CSV layout (header required):
//!
//! ```text
//! t,label,sequenced,variant_count,total_cases,tested
//! 1,2020-W46,1486,4,7533,490543
//! ```
//!
//! `total_cases` and `tested` may be empty.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of calendar days per period (weekly data).
pub const DEFAULT_PERIOD_DAYS: f64 = 7.0;

/// One period of sequencing outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationRecord {
    #[serde(rename = "t")]
    pub t_index: i64,
    pub label: String,
    /// Cases with a determined variant, `N_t`.
    pub sequenced: u64,
    /// Cases identified as the emerging variant, `X_t`.
    pub variant_count: u64,
    /// All positive cases, `C_t`.
    pub total_cases: Option<u64>,
    /// Tests performed.
    pub tested: Option<u64>,
}

impl ObservationRecord {
    pub fn new(t_index: i64, label: impl Into<String>, sequenced: u64, variant_count: u64) -> Self {
        ObservationRecord { t_index, label: label.into(), sequenced, variant_count, total_cases: None, tested: None }
    }

    pub fn with_cases(mut self, total_cases: u64, tested: Option<u64>) -> Self {
        self.total_cases = Some(total_cases);
        self.tested = tested;
        self
    }

    /// Empirical proportion `X_t / N_t`, `None` when nothing was sequenced.
    pub fn proportion(&self) -> Option<f64> {
        (self.sequenced > 0).then(|| self.variant_count as f64 / self.sequenced as f64)
    }

    fn check_counts(&self) -> Result<()> {
        if self.variant_count > self.sequenced {
            return Err(Error::CountViolation {
                t: self.t_index,
                detail: format!("variant count {} exceeds sequenced {}", self.variant_count, self.sequenced),
            });
        }
        if let Some(c) = self.total_cases {
            if self.sequenced > c {
                return Err(Error::CountViolation {
                    t: self.t_index,
                    detail: format!("sequenced {} exceeds total cases {}", self.sequenced, c),
                });
            }
        }
        Ok(())
    }
}

/// A validated, time-ordered series of [`ObservationRecord`]s.
///
/// Immutable after construction; fields are exposed read-only through accessors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveillanceSeries {
    records: Vec<ObservationRecord>,
    period_days: f64,
}

impl SurveillanceSeries {
    /// Validates `raw` and sorts it by `t_index`.
    pub fn new(mut raw: Vec<ObservationRecord>, period_days: f64) -> Result<Self> {
        if !(period_days > 0.0) || !period_days.is_finite() {
            return Err(Error::NonPositivePeriod(period_days));
        }
        if raw.len() < 2 {
            return Err(Error::EmptySeries(raw.len()));
        }
        for r in &raw {
            r.check_counts()?;
        }
        let mut seen = HashSet::with_capacity(raw.len());
        for r in &raw {
            if !seen.insert(r.t_index) {
                return Err(Error::DuplicatePeriod(r.t_index));
            }
        }
        raw.sort_by_key(|r| r.t_index);
        Ok(SurveillanceSeries { records: raw, period_days })
    }

    pub fn records(&self) -> &[ObservationRecord] {
        &self.records
    }

    pub fn period_days(&self) -> f64 {
        self.period_days
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn t_values(&self) -> impl Iterator<Item = i64> + '_ {
        self.records.iter().map(|r| r.t_index)
    }

    pub fn first_t(&self) -> i64 {
        self.records[0].t_index
    }

    pub fn last_t(&self) -> i64 {
        self.records[self.records.len() - 1].t_index
    }

    pub fn find(&self, t_index: i64) -> Option<&ObservationRecord> {
        self.records.binary_search_by_key(&t_index, |r| r.t_index).ok().map(|i| &self.records[i])
    }

    pub fn find_label(&self, label: &str) -> Option<&ObservationRecord> {
        self.records.iter().find(|r| r.label == label)
    }

    /// Sub-series of records with `from <= t <= through`. Both bounds must lie
    /// within the series.
    pub fn window(&self, from: i64, through: i64) -> Result<Self> {
        if from > through || from < self.first_t() || through > self.last_t() {
            return Err(Error::WindowOutOfRange(format!(
                "[{from}, {through}] is not inside [{}, {}]",
                self.first_t(),
                self.last_t()
            )));
        }
        let rows: Vec<_> = self.records.iter().filter(|r| r.t_index >= from && r.t_index <= through).cloned().collect();
        SurveillanceSeries::new(rows, self.period_days)
    }

    /// Same counts with every `t_index` shifted by `shift`.
    pub fn shifted(&self, shift: i64) -> Self {
        let records =
            self.records.iter().map(|r| ObservationRecord { t_index: r.t_index + shift, ..r.clone() }).collect();
        SurveillanceSeries { records, period_days: self.period_days }
    }

    /// Multiplies every sequenced, variant and total count by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        let records = self
            .records
            .iter()
            .map(|r| ObservationRecord {
                sequenced: r.sequenced * factor,
                variant_count: r.variant_count * factor,
                total_cases: r.total_cases.map(|c| c * factor),
                ..r.clone()
            })
            .collect();
        SurveillanceSeries { records, period_days: self.period_days }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Convenience wrapper over [`SurveillanceSeries::new`].
pub fn validate_series(raw: Vec<ObservationRecord>, period_days: f64) -> Result<SurveillanceSeries> {
    SurveillanceSeries::new(raw, period_days)
}

/// Parses a series from any CSV reader.
pub fn read_csv<R: Read>(reader: R, period_days: f64) -> Result<SurveillanceSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<ObservationRecord>().enumerate() {
        let rec = rec.map_err(|e| Error::ParseError {
            row: e.position().map(|p| p.line()).unwrap_or(i as u64 + 2),
            message: e.to_string(),
        })?;
        rows.push(rec);
    }
    SurveillanceSeries::new(rows, period_days)
}

pub fn load_csv(path: impl AsRef<Path>, period_days: f64) -> Result<SurveillanceSeries> {
    let file =
        std::fs::File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(file, period_days)
}

/// Logistic-model parameters: `alpha` is the log-odds at `t = 0`,
/// `beta` the per-period log advantage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("parameters must be finite, got ({alpha}, {beta})")));
        }
        Ok(ModelParams { alpha, beta })
    }

    /// Linear predictor `alpha + beta * t`.
    pub fn eta(&self, t: f64) -> f64 {
        self.alpha + self.beta * t
    }

    /// Per-period multiplicative advantage `exp(beta)`.
    pub fn gamma(&self) -> f64 {
        self.beta.exp()
    }
}
