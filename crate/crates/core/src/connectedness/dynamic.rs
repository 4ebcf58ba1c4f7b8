use std::ops::Range;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{gfevd, indices, ConnectednessReport, FevdTable};
use crate::error::{Error, Result};
use crate::tvp::TvpPath;

/// Fraction of dates allowed to fail decomposition before the run aborts.
pub const MAX_FAILURE_SHARE: f64 = 0.01;

/// Per-date connectedness along a filtered path.
#[derive(Debug, Clone)]
pub struct DynamicConnectedness {
    pub horizon: usize,
    pub tickers: Vec<String>,
    /// Dates that decomposed successfully, in order.
    pub dates: Vec<NaiveDate>,
    pub reports: Vec<ConnectednessReport>,
    /// Dates skipped, with the reason.
    pub failures: Vec<(NaiveDate, String)>,
}

impl DynamicConnectedness {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn tci_series(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.tci).collect()
    }

    /// Report from the mean shares over every date.
    pub fn average(&self, label: &str) -> Result<ConnectednessReport> {
        self.average_over(0..self.len(), label)
    }

    /// Report from the mean shares over dates `range` (indices into [`Self::dates`]).
    pub fn average_over(&self, range: Range<usize>, label: &str) -> Result<ConnectednessReport> {
        let slice = self.reports.get(range.clone()).ok_or_else(|| {
            Error::InvalidArgument(format!("date range {range:?} out of bounds for {} dates", self.len()))
        })?;
        average_tables(slice, label)
    }

    /// Indices of dates within `[start, end)`.
    pub fn date_range(&self, start: NaiveDate, end: Option<NaiveDate>) -> Range<usize> {
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = end.map_or(self.len(), |e| self.dates.partition_point(|d| *d < e));
        lo..hi.max(lo)
    }
}

/// Indices recomputed from the arithmetic mean of the reports' shares.
pub fn average_tables(reports: &[ConnectednessReport], label: &str) -> Result<ConnectednessReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InsufficientData(format!("no dates to average for {label}")))?;
    let n = first.n_vars();
    let mut mean = DMatrix::zeros(n, n);
    for r in reports {
        mean += &r.shares;
    }
    mean /= reports.len() as f64;
    let table = FevdTable {
        tickers: first.tickers.clone(),
        horizon: first.horizon,
        raw: mean.clone(),
        normalized: mean,
    };
    Ok(indices(&table, label))
}

/// Decompose every date of `path`. Dates are processed in parallel and merged in order.
pub fn dynamic_indices(path: &TvpPath, horizon: usize) -> Result<DynamicConnectedness> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be positive".into()));
    }
    let results: Vec<(NaiveDate, Result<ConnectednessReport>)> = (0..path.len())
        .into_par_iter()
        .map(|t| {
            let out = path.snapshot(t).and_then(|s| {
                let label = s.date.to_string();
                Ok(indices(&gfevd(&s.model, horizon)?, label))
            });
            (path.dates[t], out)
        })
        .collect();

    let mut dyn_ = DynamicConnectedness {
        horizon,
        tickers: path.tickers.clone(),
        dates: Vec::with_capacity(results.len()),
        reports: Vec::with_capacity(results.len()),
        failures: Vec::new(),
    };
    for (date, r) in results {
        match r {
            Ok(rep) => {
                dyn_.dates.push(date);
                dyn_.reports.push(rep);
            }
            Err(e) => dyn_.failures.push((date, e.to_string())),
        }
    }
    let total = path.len().max(1) as f64;
    if dyn_.failures.len() as f64 > MAX_FAILURE_SHARE * total {
        let (date, why) = &dyn_.failures[0];
        return Err(Error::Numerical(format!(
            "{} of {} dates failed to decompose (first on {date}: {why})",
            dyn_.failures.len(),
            path.len()
        )));
    }
    Ok(dyn_)
}
