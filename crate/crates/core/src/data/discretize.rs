use serde::{Deserialize, Serialize};

use super::{Column, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinStrategy {
    EqualWidth,
    EqualFrequency,
}

impl std::str::FromStr for BinStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-width" | "width" => Ok(BinStrategy::EqualWidth),
            "equal-frequency" | "frequency" | "quantile" => Ok(BinStrategy::EqualFrequency),
            other => Err(Error::InvalidArgument(format!("unknown bin strategy {other:?}"))),
        }
    }
}

impl std::fmt::Display for BinStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BinStrategy::EqualWidth => "equal-width",
            BinStrategy::EqualFrequency => "equal-frequency",
        })
    }
}

/// Bins every continuous column; categorical columns and labels pass through.
///
/// Constant columns become a single bin (cardinality 1). Otherwise the
/// cardinality is `bins`, even when some bins end up empty.
pub fn discretize(ds: &Dataset, bins: usize, strategy: BinStrategy) -> Result<Dataset> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("bins must be at least 2, got {bins}")));
    }
    let columns = ds
        .columns()
        .iter()
        .map(|col| match col {
            Column::Continuous(values) => {
                let (codes, cardinality) = match strategy {
                    BinStrategy::EqualWidth => equal_width(values, bins),
                    BinStrategy::EqualFrequency => equal_frequency(values, bins),
                };
                Column::Categorical { codes, cardinality }
            }
            other => other.clone(),
        })
        .collect();
    ds.replace_columns(columns)
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn equal_width(values: &[f64], bins: usize) -> (Vec<u32>, usize) {
    let (lo, hi) = min_max(values);
    if hi <= lo {
        return (vec![0; values.len()], 1);
    }
    let width = (hi - lo) / bins as f64;
    let codes = values
        .iter()
        .map(|&v| (((v - lo) / width).floor() as usize).min(bins - 1) as u32)
        .collect();
    (codes, bins)
}

/// Thresholds are the order statistics at ranks `floor(b * n / bins)`; a value
/// lands in the bin counting how many thresholds it reaches, so ties share a bin.
fn equal_frequency(values: &[f64], bins: usize) -> (Vec<u32>, usize) {
    let (lo, hi) = min_max(values);
    if hi <= lo {
        return (vec![0; values.len()], 1);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let thresholds: Vec<f64> = (1..bins).map(|b| sorted[b * n / bins]).collect();
    let codes = values
        .iter()
        .map(|&v| thresholds.partition_point(|&t| t <= v) as u32)
        .collect();
    (codes, bins)
}
