// SPDX-License-Identifier: MIT OR Apache-2.0
//! Count series CSV input and output.
//!
//! One observation per line. The last comma-separated field is the count,
//! so a leading index or date column is ignored. `NA` or an empty field
//! marks a missing observation. A non-numeric first line is a header.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use countdiag::CountSeries;

use crate::error::{HarnessError, Result};

/// What to store in the value slot of a missing observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NaPolicy {
    /// Keep missing entries masked with a zero placeholder.
    #[default]
    Mask,
    /// Drop missing entries and return the compacted, fully observed series.
    Drop,
}

pub fn load_series_csv(path: impl AsRef<Path>, policy: NaPolicy) -> Result<CountSeries> {
    read_series(std::fs::File::open(path)?, policy)
}

pub fn read_series<R: Read>(input: R, policy: NaPolicy) -> Result<CountSeries> {
    // (value, observed, blank line)
    let mut rows: Vec<(u64, bool, bool)> = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        let field = line.rsplit(',').next().unwrap_or("").trim().trim_matches('"');
        if field.is_empty() || field == "NA" {
            rows.push((0, false, line.trim().is_empty()));
        } else if let Ok(v) = field.parse::<u64>() {
            rows.push((v, true, false));
        } else if i == 0 && field.parse::<f64>().is_err() {
            // header line
        } else {
            return Err(HarnessError::Parse {
                row: i + 1,
                msg: format!("{field:?} is not a non-negative integer"),
            });
        }
    }
    // blank lines at the end are formatting, not missing values
    while rows.last().is_some_and(|r| r.2) {
        rows.pop();
    }
    if rows.is_empty() {
        return Err(HarnessError::Empty);
    }
    let (values, mask) = rows.into_iter().map(|(v, m, _)| (v, m)).unzip();
    let series = CountSeries::new(values, mask)?;
    match policy {
        NaPolicy::Mask => Ok(series),
        NaPolicy::Drop => {
            if series.n_observed() == 0 {
                return Err(HarnessError::Empty);
            }
            Ok(series.compact()?)
        }
    }
}

/// Writes `t,value` rows, with `NA` for masked entries.
pub fn write_series<W: Write>(series: &CountSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value"])?;
    for (t, (&v, &m)) in series.values().iter().zip(series.mask()).enumerate() {
        let v = if m { v.to_string() } else { "NA".to_string() };
        w.write_record([(t + 1).to_string(), v])?;
    }
    w.flush()?;
    Ok(())
}
