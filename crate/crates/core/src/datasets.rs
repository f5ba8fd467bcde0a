//! Danish sequencing data for the Alpha, Delta and Omicron emergence periods.
//!
//! Rows are `(label, tested, cases, sequenced, variant)`. `t_index` runs
//! `1..=T` in row order, so `t = 0` is one period before the first row.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::data::{ObservationRecord, SurveillanceSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    /// Weekly, 2020-W46 to 2021-W10, Alpha vs ancestral.
    Alpha,
    /// Weekly, 2021-W20 to 2021-W29, Delta vs Alpha.
    Delta,
    /// Daily, 2021-12-01 to 2021-12-31, Omicron vs Delta.
    Omicron,
}

type Row = (&'static str, u64, u64, u64, u64);

const ALPHA: &[Row] = &[
    ("2020-W46", 490_543, 7_533, 1_486, 4),
    ("2020-W47", 502_852, 8_456, 1_941, 3),
    ("2020-W48", 502_851, 8_774, 2_127, 7),
    ("2020-W49", 544_578, 12_816, 2_868, 11),
    ("2020-W50", 694_989, 21_925, 4_226, 16),
    ("2020-W51", 883_253, 24_579, 4_943, 37),
    ("2020-W52", 650_374, 17_043, 3_633, 64),
    ("2020-W53", 536_958, 14_560, 3_916, 80),
    ("2021-W01", 563_348, 11_311, 4_161, 157),
    ("2021-W02", 596_048, 7_008, 4_230, 298),
    ("2021-W03", 739_922, 5_321, 3_688, 473),
    ("2021-W04", 768_925, 3_616, 2_660, 519),
    ("2021-W05", 794_917, 3_096, 2_235, 663),
    ("2021-W06", 809_028, 2_716, 1_974, 929),
    ("2021-W07", 833_795, 3_335, 2_416, 1_590),
    ("2021-W08", 956_070, 3_688, 2_683, 2_042),
    ("2021-W09", 1_033_111, 3_616, 2_699, 2_299),
    ("2021-W10", 1_056_404, 3_809, 2_874, 2_657),
];

const DELTA: &[Row] = &[
    ("2021-W20", 1_167_981, 6_867, 5_366, 13),
    ("2021-W21", 1_013_403, 6_698, 5_213, 15),
    ("2021-W22", 911_764, 5_662, 4_565, 36),
    ("2021-W23", 720_274, 2_811, 2_467, 66),
    ("2021-W24", 575_207, 1_649, 1_364, 91),
    ("2021-W25", 524_837, 1_315, 1_165, 345),
    ("2021-W26", 608_540, 2_674, 2_418, 1_555),
    ("2021-W27", 624_414, 4_614, 3_322, 2_702),
    ("2021-W28", 583_932, 6_818, 6_253, 5_781),
    ("2021-W29", 473_843, 5_289, 4_800, 4_591),
];

// Sequencing switched to a representative subsample around 2021-12-20;
// counts are kept as published, without reweighting.
const OMICRON: &[Row] = &[
    ("2021-12-01", 185_372, 4_910, 4_267, 77),
    ("2021-12-02", 213_494, 5_040, 4_294, 62),
    ("2021-12-03", 188_041, 5_651, 4_946, 75),
    ("2021-12-04", 140_790, 5_577, 5_089, 111),
    ("2021-12-05", 147_722, 5_450, 4_995, 167),
    ("2021-12-06", 209_434, 7_645, 6_762, 337),
    ("2021-12-07", 207_987, 7_902, 6_928, 515),
    ("2021-12-08", 205_263, 7_136, 6_232, 649),
    ("2021-12-09", 243_089, 7_157, 6_228, 707),
    ("2021-12-10", 210_756, 7_520, 6_444, 843),
    ("2021-12-11", 153_995, 7_210, 6_443, 1_080),
    ("2021-12-12", 165_474, 7_723, 6_794, 1_521),
    ("2021-12-13", 229_948, 11_350, 9_316, 2_691),
    ("2021-12-14", 221_944, 12_252, 10_456, 4_044),
    ("2021-12-15", 217_007, 12_041, 10_409, 4_827),
    ("2021-12-16", 254_680, 11_388, 9_475, 4_438),
    ("2021-12-17", 233_617, 11_950, 9_860, 5_213),
    ("2021-12-18", 174_168, 11_420, 9_233, 5_163),
    ("2021-12-19", 180_302, 11_717, 7_927, 4_908),
    ("2021-12-20", 267_264, 15_228, 2_565, 1_611),
    ("2021-12-21", 254_893, 14_875, 3_199, 2_437),
    ("2021-12-22", 269_139, 13_684, 1_323, 1_035),
    ("2021-12-23", 243_139, 14_729, 3_450, 2_708),
    ("2021-12-24", 71_463, 8_322, 597, 494),
    ("2021-12-25", 71_502, 9_233, 915, 705),
    ("2021-12-26", 79_592, 12_300, 2_297, 1_986),
    ("2021-12-27", 182_893, 25_168, 4_657, 4_134),
    ("2021-12-28", 191_226, 24_273, 1_471, 1_324),
    ("2021-12-29", 213_584, 19_292, 359, 333),
    ("2021-12-30", 225_529, 21_727, 910, 829),
    ("2021-12-31", 71_125, 11_027, 429, 393),
];

impl Dataset {
    pub const ALL: [Dataset; 3] = [Dataset::Alpha, Dataset::Delta, Dataset::Omicron];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Alpha => "alpha",
            Dataset::Delta => "delta",
            Dataset::Omicron => "omicron",
        }
    }

    /// Calendar days per period: 7 for the weekly tables, 1 for Omicron.
    pub fn period_days(self) -> f64 {
        match self {
            Dataset::Omicron => 1.0,
            _ => 7.0,
        }
    }

    fn rows(self) -> &'static [Row] {
        match self {
            Dataset::Alpha => ALPHA,
            Dataset::Delta => DELTA,
            Dataset::Omicron => OMICRON,
        }
    }

    pub fn series(self) -> SurveillanceSeries {
        let records = self
            .rows()
            .iter()
            .zip(1..)
            .map(|(&(label, tested, cases, n, x), t)| {
                ObservationRecord::new(t, label, n, x).with_cases(cases, Some(tested))
            })
            .collect();
        SurveillanceSeries::new(records, self.period_days()).expect("bundled tables are valid")
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" => Ok(Dataset::Alpha),
            "delta" => Ok(Dataset::Delta),
            "omicron" => Ok(Dataset::Omicron),
            _ => Err(Error::UnknownDataset(s.to_string())),
        }
    }
}

pub fn load_bundled(name: &str) -> Result<SurveillanceSeries> {
    Ok(name.parse::<Dataset>()?.series())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(load_bundled("alpha").unwrap().len(), 18);
        assert_eq!(load_bundled("delta").unwrap().len(), 10);
        assert_eq!(load_bundled("omicron").unwrap().len(), 31);
        assert_eq!(load_bundled("beta").unwrap_err(), Error::UnknownDataset("beta".into()));
    }

    #[test]
    fn spot_rows() {
        let a = load_bundled("alpha").unwrap();
        let w46 = a.find_label("2020-W46").unwrap();
        assert_eq!((w46.sequenced, w46.variant_count), (1486, 4));
        assert_eq!(w46.t_index, 1);

        let o = load_bundled("omicron").unwrap();
        let d8 = o.find_label("2021-12-08").unwrap();
        assert_eq!((d8.sequenced, d8.variant_count), (6232, 649));
        assert_eq!(o.period_days(), 1.0);

        let d = load_bundled("delta").unwrap();
        let w25 = d.find_label("2021-W25").unwrap();
        assert_eq!((w25.sequenced, w25.variant_count), (1165, 345));
    }

    /// Printed percentages: two decimals for the weekly tables, one for Omicron.
    #[test]
    fn printed_proportions() {
        let alpha_pct = [
            0.27, 0.15, 0.33, 0.38, 0.38, 0.75, 1.76, 2.04, 3.77, 7.04, 12.83, 19.51, 29.66, 47.06, 65.81, 76.11,
            85.18, 92.45,
        ];
        let delta_pct = [0.24, 0.29, 0.79, 2.68, 6.67, 29.61, 64.31, 81.34, 92.45, 95.65];
        let omicron_pct = [
            1.8, 1.4, 1.5, 2.2, 3.3, 5.0, 7.4, 10.4, 11.4, 13.1, 16.8, 22.4, 28.9, 38.7, 46.4, 46.8, 52.9, 55.9, 61.9,
            62.8, 76.2, 78.2, 78.5, 82.7, 77.0, 86.5, 88.8, 90.0, 92.8, 91.1, 91.6,
        ];
        for (ds, pct, scale) in [
            (Dataset::Alpha, &alpha_pct[..], 100.0),
            (Dataset::Delta, &delta_pct[..], 100.0),
            (Dataset::Omicron, &omicron_pct[..], 10.0),
        ] {
            let s = ds.series();
            for (r, &p) in s.records().iter().zip(pct) {
                let got = (r.proportion().unwrap() * 100.0 * scale).round() / scale;
                assert!((got - p).abs() < 1e-9, "{ds} {}: {got} vs {p}", r.label);
            }
        }
    }
}
