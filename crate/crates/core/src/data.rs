//! Price ingestion, calendar alignment and return construction.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::g12;

/// One ticker's dated price (or level) observations.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub ticker: String,
    /// Strictly increasing dates, all prices positive.
    pub observations: Vec<(NaiveDate, f64)>,
}

impl RawSeries {
    /// Build a series from unordered observations, sorting by date and collapsing exact duplicates.
    pub fn new(ticker: impl Into<String>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let ticker = ticker.into();
        let mut by_date: BTreeMap<NaiveDate, f64> = BTreeMap::new();
        for (date, price) in observations {
            if !(price.is_finite() && price > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{ticker}: price {price} on {date} is not positive"
                )));
            }
            if let Some(prev) = by_date.insert(date, price) {
                if prev != price {
                    return Err(Error::ConflictingDuplicate {
                        ticker,
                        date: date.to_string(),
                    });
                }
            }
        }
        if by_date.is_empty() {
            return Err(Error::NoValidRows(ticker));
        }
        Ok(RawSeries {
            ticker,
            observations: by_date.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Column mapping for a price CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub date_column: String,
    pub price_column: String,
    /// `chrono` format string.
    pub date_format: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            date_column: "date".into(),
            price_column: "price".into(),
            date_format: "%Y-%m-%d".into(),
        }
    }
}

/// A parsed series together with the number of rows dropped for bad prices.
#[derive(Debug, Clone)]
pub struct LoadedSeries {
    pub series: RawSeries,
    pub rejected: usize,
}

pub fn load_csv(path: impl AsRef<Path>, ticker: &str, schema: &CsvSchema) -> Result<LoadedSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, ticker, schema, &path.display().to_string())
}

/// Parse price CSV text from any reader. `source` is used in error messages only.
///
/// Rows whose price is unparseable or non-positive are skipped and counted.
/// Unparseable dates are a hard error.
pub fn read_csv<R: Read>(
    reader: R,
    ticker: &str,
    schema: &CsvSchema,
    source: &str,
) -> Result<LoadedSeries> {
    let csv_err = |message: String| Error::Csv {
        path: source.into(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| csv_err(format!("missing column `{name}`")))
    };
    let date_idx = find(&schema.date_column)?;
    let price_idx = find(&schema.price_column)?;

    let mut observations = Vec::new();
    let mut rejected = 0;
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_err(e.to_string()))?;
        let raw_date = record.get(date_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, &schema.date_format).map_err(|e| {
            csv_err(format!("row {}: cannot parse date `{raw_date}`: {e}", row + 1))
        })?;
        match record.get(price_idx).and_then(|p| p.parse::<f64>().ok()) {
            Some(p) if p.is_finite() && p > 0.0 => observations.push((date, p)),
            _ => rejected += 1,
        }
    }
    if observations.is_empty() {
        return Err(Error::NoValidRows(source.into()));
    }
    let series = RawSeries::new(ticker, observations)?;
    Ok(LoadedSeries { series, rejected })
}

/// Prices of several series restricted to their common dates.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPrices {
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// T × N, columns in ticker order.
    pub prices: DMatrix<f64>,
}

/// Inner-join the series on dates present in all of them.
pub fn align(series: &[RawSeries]) -> Result<AlignedPrices> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("no series to align".into()));
    }
    if let Some(s) = series.iter().find(|s| s.is_empty()) {
        return Err(Error::NoValidRows(s.ticker.clone()));
    }
    let mut common: BTreeSet<NaiveDate> = series[0].observations.iter().map(|o| o.0).collect();
    for s in &series[1..] {
        let dates: BTreeSet<NaiveDate> = s.observations.iter().map(|o| o.0).collect();
        common = common.intersection(&dates).copied().collect();
    }
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let mut prices = DMatrix::zeros(dates.len(), series.len());
    for (col, s) in series.iter().enumerate() {
        let lookup: BTreeMap<NaiveDate, f64> = s.observations.iter().copied().collect();
        for (row, d) in dates.iter().enumerate() {
            prices[(row, col)] = lookup[d];
        }
    }
    Ok(AlignedPrices {
        tickers: series.iter().map(|s| s.ticker.clone()).collect(),
        dates,
        prices,
    })
}

/// How a price column becomes a stationary series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    LogDiff,
    PlainDiff,
}

impl Transform {
    pub fn as_str(self) -> &'static str {
        match self {
            Transform::LogDiff => "log_diff",
            Transform::PlainDiff => "plain_diff",
        }
    }
}

/// Date-aligned T × N matrix of differenced series.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub tickers: Vec<String>,
    /// `dates[t]` is the later date of the difference in row `t`.
    pub dates: Vec<NaiveDate>,
    pub values: DMatrix<f64>,
    pub transforms: Vec<Transform>,
}

/// Difference each price column, `transforms` holding either one mode for all columns or one per column.
pub fn to_returns(prices: &AlignedPrices, transforms: &[Transform]) -> Result<ReturnPanel> {
    let (t, n) = prices.prices.shape();
    let modes: Vec<Transform> = match transforms.len() {
        0 => vec![Transform::LogDiff; n],
        1 => vec![transforms[0]; n],
        len if len == n => transforms.to_vec(),
        len => {
            return Err(Error::InvalidArgument(format!(
                "{len} transforms for {n} columns"
            )))
        }
    };
    if t < 2 {
        return Err(Error::InsufficientData(format!(
            "{t} aligned rows; at least 2 are needed for differencing"
        )));
    }
    let mut values = DMatrix::zeros(t - 1, n);
    for (col, mode) in modes.iter().enumerate() {
        if *mode == Transform::LogDiff {
            if let Some(row) = (0..t).find(|&r| !(prices.prices[(r, col)] > 0.0)) {
                return Err(Error::NonPositivePrice {
                    column: prices.tickers[col].clone(),
                    row,
                    value: prices.prices[(row, col)],
                });
            }
        }
        for row in 1..t {
            let (prev, cur) = (prices.prices[(row - 1, col)], prices.prices[(row, col)]);
            values[(row - 1, col)] = match mode {
                Transform::LogDiff => cur.ln() - prev.ln(),
                Transform::PlainDiff => cur - prev,
            };
        }
    }
    Ok(ReturnPanel {
        tickers: prices.tickers.clone(),
        dates: prices.dates[1..].to_vec(),
        values,
        transforms: modes,
    })
}

impl ReturnPanel {
    /// Wrap an existing matrix, checking shapes and finiteness.
    pub fn new(tickers: Vec<String>, dates: Vec<NaiveDate>, values: DMatrix<f64>) -> Result<Self> {
        if values.ncols() != tickers.len() || values.nrows() != dates.len() {
            return Err(Error::InvalidArgument(format!(
                "panel is {} × {} but has {} dates and {} tickers",
                values.nrows(),
                values.ncols(),
                dates.len(),
                tickers.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("panel dates must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("panel contains non-finite values".into()));
        }
        let transforms = vec![Transform::LogDiff; tickers.len()];
        Ok(ReturnPanel {
            tickers,
            dates,
            values,
            transforms,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        self.values.column(col).iter().copied().collect()
    }

    /// Panel with columns reordered (or subset) by `order`.
    pub fn select_columns(&self, order: &[usize]) -> ReturnPanel {
        let values = DMatrix::from_fn(self.n_obs(), order.len(), |r, c| self.values[(r, order[c])]);
        ReturnPanel {
            tickers: order.iter().map(|&c| self.tickers[c].clone()).collect(),
            dates: self.dates.clone(),
            values,
            transforms: order.iter().map(|&c| self.transforms[c]).collect(),
        }
    }

    pub fn slice_rows(&self, rows: Range<usize>) -> ReturnPanel {
        ReturnPanel {
            tickers: self.tickers.clone(),
            dates: self.dates[rows.clone()].to_vec(),
            values: self.values.rows(rows.start, rows.len()).into_owned(),
            transforms: self.transforms.clone(),
        }
    }

    /// Rows whose date falls in `[start, end]`.
    pub fn restrict(&self, start: Option<NaiveDate>, end: Option<NaiveDate>) -> ReturnPanel {
        let lo = start.map_or(0, |s| self.dates.partition_point(|d| *d < s));
        let hi = end.map_or(self.dates.len(), |e| self.dates.partition_point(|d| *d <= e));
        self.slice_rows(lo..hi.max(lo))
    }

    /// CSV with a `date` column followed by one column per ticker, 12 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["date".to_string()];
        header.extend(self.tickers.iter().cloned());
        w.write_record(&header)?;
        for (row, date) in self.dates.iter().enumerate() {
            let mut rec = vec![date.format("%Y-%m-%d").to_string()];
            rec.extend((0..self.n_vars()).map(|c| g12(self.values[(row, c)])));
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

/// Break dates that cut a panel into consecutive segments.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSplit {
    pub break_dates: Vec<NaiveDate>,
    /// One label per segment; empty means `segment1`, `segment2`, ...
    pub labels: Vec<String>,
}

impl SampleSplit {
    pub fn new(break_dates: Vec<NaiveDate>, labels: Vec<String>) -> Self {
        SampleSplit { break_dates, labels }
    }

    pub fn segment_labels(&self) -> Vec<String> {
        if self.labels.len() == self.break_dates.len() + 1 {
            self.labels.clone()
        } else {
            (1..=self.break_dates.len() + 1)
                .map(|k| format!("segment{k}"))
                .collect()
        }
    }

    /// Row ranges of each segment over `dates`. A break's own date opens the later segment.
    pub fn segment_ranges(&self, dates: &[NaiveDate]) -> Result<Vec<Range<usize>>> {
        if !self.labels.is_empty() && self.labels.len() != self.break_dates.len() + 1 {
            return Err(Error::Config(format!(
                "{} labels for {} segments",
                self.labels.len(),
                self.break_dates.len() + 1
            )));
        }
        let (Some(first), Some(last)) = (dates.first(), dates.last()) else {
            return Err(Error::InsufficientData("empty panel".into()));
        };
        let mut cuts = vec![0];
        for b in &self.break_dates {
            if b <= first || b > last {
                return Err(Error::BreakOutOfRange(b.to_string()));
            }
            let idx = dates.partition_point(|d| d < b);
            if idx <= *cuts.last().expect("non-empty") {
                return Err(Error::Config(format!(
                    "break date {b} would create an empty segment"
                )));
            }
            cuts.push(idx);
        }
        cuts.push(dates.len());
        Ok(cuts.windows(2).map(|w| w[0]..w[1]).collect())
    }
}

pub fn split_panel(panel: &ReturnPanel, split: &SampleSplit) -> Result<Vec<ReturnPanel>> {
    Ok(split
        .segment_ranges(&panel.dates)?
        .into_iter()
        .map(|r| panel.slice_rows(r))
        .collect())
}
