use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::{CsvSchema, SampleSplit, Transform};
use crate::error::{Error, Result};
use crate::network::DEFAULT_EDGE_THRESHOLD;
use crate::tvp::TvpConfig;

/// VAR lag order: a fixed integer or `"auto"` (BIC over `1..=p_max`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lag {
    #[default]
    Auto,
    Fixed(usize),
}

impl Serialize for Lag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Lag::Auto => s.serialize_str("auto"),
            Lag::Fixed(p) => s.serialize_u64(*p as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Lag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(p) if p >= 1 => Ok(Lag::Fixed(p as usize)),
            Raw::Int(p) => Err(serde::de::Error::custom(format!("lag must be at least 1, got {p}"))),
            Raw::Text(s) if s == "auto" => Ok(Lag::Auto),
            Raw::Text(s) => s
                .parse::<Lag>()
                .map_err(|_| serde::de::Error::custom(format!("lag must be \"auto\" or a positive integer, got {s:?}"))),
        }
    }
}

impl std::str::FromStr for Lag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Lag::Auto);
        }
        match s.parse::<usize>() {
            Ok(p) if p >= 1 => Ok(Lag::Fixed(p)),
            _ => Err(Error::Config(format!("lag must be \"auto\" or a positive integer, got {s:?}"))),
        }
    }
}

/// A date written either as a TOML date literal or as a `YYYY-MM-DD` string.
#[derive(Deserialize)]
#[serde(untagged)]
enum DateField {
    Toml(toml::value::Datetime),
    Text(String),
}

impl DateField {
    fn into_date<E: serde::de::Error>(self) -> std::result::Result<NaiveDate, E> {
        match self {
            DateField::Toml(dt) => match (dt.date, dt.time) {
                (Some(d), None) => NaiveDate::from_ymd_opt(i32::from(d.year), u32::from(d.month), u32::from(d.day))
                    .ok_or_else(|| E::custom(format!("invalid date {dt}"))),
                _ => Err(E::custom(format!("expected a date without time, got {dt}"))),
            },
            DateField::Text(s) => NaiveDate::parse_from_str(&s, "%Y-%m-%d")
                .map_err(|e| E::custom(format!("invalid date {s:?}: {e}"))),
        }
    }
}

fn de_opt_date<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<NaiveDate>, D::Error> {
    Option::<DateField>::deserialize(d)?.map(DateField::into_date).transpose()
}

fn de_dates<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<NaiveDate>, D::Error> {
    Vec::<DateField>::deserialize(d)?.into_iter().map(DateField::into_date).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub ticker: String,
    /// CSV file; relative paths resolve against the config file's directory.
    pub path: PathBuf,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    #[serde(default = "default_price_column")]
    pub price_column: String,
    #[serde(default = "default_date_format")]
    pub date_format: String,
    #[serde(default)]
    pub transform: Transform,
}

fn default_date_column() -> String {
    CsvSchema::default().date_column
}
fn default_price_column() -> String {
    CsvSchema::default().price_column
}
fn default_date_format() -> String {
    CsvSchema::default().date_format
}

impl SeriesConfig {
    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            date_column: self.date_column.clone(),
            price_column: self.price_column.clone(),
            date_format: self.date_format.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TvpSettings {
    pub kappa1: f64,
    pub kappa2: f64,
    pub prior_window: usize,
    pub inflation: f64,
    pub include_prior_window: bool,
}

impl Default for TvpSettings {
    fn default() -> Self {
        let d = TvpConfig::default();
        TvpSettings {
            kappa1: d.kappa1,
            kappa2: d.kappa2,
            prior_window: d.prior_window,
            inflation: d.inflation,
            include_prior_window: d.include_prior_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub series: Vec<SeriesConfig>,
    /// Inclusive bounds on the aligned price dates.
    #[serde(default, deserialize_with = "de_opt_date")]
    pub start: Option<NaiveDate>,
    #[serde(default, deserialize_with = "de_opt_date")]
    pub end: Option<NaiveDate>,
    #[serde(default)]
    pub lag: Lag,
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_true")]
    pub intercept: bool,
    #[serde(default)]
    pub tvp: TvpSettings,
    #[serde(default, deserialize_with = "de_dates")]
    pub break_dates: Vec<NaiveDate>,
    #[serde(default)]
    pub segment_labels: Vec<String>,
    #[serde(default = "default_edge_threshold")]
    pub edge_threshold: f64,
    #[serde(default = "default_q2_lags")]
    pub q2_lags: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Directory that relative paths resolve against; set when loading a file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_p_max() -> usize {
    5
}
fn default_horizon() -> usize {
    10
}
fn default_true() -> bool {
    true
}
fn default_edge_threshold() -> f64 {
    DEFAULT_EDGE_THRESHOLD
}
fn default_q2_lags() -> usize {
    crate::diagnostics::DEFAULT_Q2_LAGS
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

/// Values that replace the file's settings, typically from command-line flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub lag: Option<Lag>,
    pub p_max: Option<usize>,
    pub horizon: Option<usize>,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub prior_window: Option<usize>,
    pub inflation: Option<f64>,
    pub include_prior_window: Option<bool>,
    pub edge_threshold: Option<f64>,
    pub break_dates: Option<Vec<NaiveDate>>,
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = &o.$field { $target = v.clone(); })*
            };
        }
        set!(
            output_dir => self.output_dir,
            lag => self.lag,
            p_max => self.p_max,
            horizon => self.horizon,
            kappa1 => self.tvp.kappa1,
            kappa2 => self.tvp.kappa2,
            prior_window => self.tvp.prior_window,
            inflation => self.tvp.inflation,
            include_prior_window => self.tvp.include_prior_window,
            edge_threshold => self.edge_threshold,
            break_dates => self.break_dates,
        );
        if o.start.is_some() {
            self.start = o.start;
        }
        if o.end.is_some() {
            self.end = o.end;
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn split(&self) -> SampleSplit {
        SampleSplit::new(self.break_dates.clone(), self.segment_labels.clone())
    }

    /// TVP settings with the given lag order.
    pub fn tvp_config(&self, lag_order: usize) -> TvpConfig {
        TvpConfig {
            kappa1: self.tvp.kappa1,
            kappa2: self.tvp.kappa2,
            prior_window: self.tvp.prior_window,
            lag_order,
            inflation: self.tvp.inflation,
            intercept: self.intercept,
            include_prior_window: self.tvp.include_prior_window,
        }
    }

    /// Range and consistency checks that need no data.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.series.is_empty() {
            return bad("at least one [[series]] entry is required".into());
        }
        for (k, s) in self.series.iter().enumerate() {
            if s.ticker.trim().is_empty() {
                return bad(format!("series {} has an empty ticker", k + 1));
            }
            if self.series[..k].iter().any(|o| o.ticker == s.ticker) {
                return bad(format!("ticker {} is listed twice", s.ticker));
            }
            let p = self.resolve(&s.path);
            if !p.is_file() {
                return bad(format!("input file for {} not found: {}", s.ticker, p.display()));
            }
        }
        if let (Some(a), Some(b)) = (self.start, self.end) {
            if b < a {
                return bad(format!("end date {b} is before start date {a}"));
            }
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.p_max == 0 {
            return bad("p_max must be at least 1".into());
        }
        if let Lag::Fixed(0) = self.lag {
            return bad("lag must be at least 1".into());
        }
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.tvp.kappa1) || !unit(self.tvp.kappa2) {
            return bad(format!(
                "kappa1 and kappa2 must lie in (0, 1]; got {} and {}",
                self.tvp.kappa1, self.tvp.kappa2
            ));
        }
        if !(self.tvp.inflation > 0.0 && self.tvp.inflation.is_finite()) {
            return bad(format!("inflation must be positive; got {}", self.tvp.inflation));
        }
        if !(0.0..=1.0).contains(&self.edge_threshold) {
            return bad(format!("edge_threshold must lie in [0, 1]; got {}", self.edge_threshold));
        }
        if self.q2_lags == 0 {
            return bad("q2_lags must be at least 1".into());
        }
        if self.break_dates.windows(2).any(|w| w[1] <= w[0]) {
            return bad("break_dates must be strictly increasing".into());
        }
        if !self.segment_labels.is_empty() && self.segment_labels.len() != self.break_dates.len() + 1 {
            return bad(format!(
                "{} segment labels for {} segments",
                self.segment_labels.len(),
                self.break_dates.len() + 1
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn with_inputs(body: &str) -> (tempfile::TempDir, RunConfig) {
        let dir = tempfile::tempdir().unwrap();
        for t in ["a.csv", "b.csv"] {
            let mut f = std::fs::File::create(dir.path().join(t)).unwrap();
            writeln!(f, "date,price\n2020-01-01,1").unwrap();
        }
        let text = format!(
            "{body}\n[[series]]\nticker = \"A\"\npath = \"a.csv\"\n[[series]]\nticker = \"B\"\npath = \"b.csv\"\n"
        );
        let cfg = RunConfig::from_toml(&text, dir.path()).unwrap();
        (dir, cfg)
    }

    #[test]
    fn defaults_fill_in() {
        let (_d, cfg) = with_inputs("");
        assert_eq!(cfg.lag, Lag::Auto);
        assert_eq!(cfg.horizon, 10);
        assert_eq!(cfg.tvp, TvpSettings::default());
        assert_eq!(cfg.edge_threshold, 0.75);
        assert_eq!(cfg.series[0].transform, Transform::LogDiff);
        cfg.validate().unwrap();
        let (_d, cfg) = with_inputs("start = 2015-01-06\nend = \"2023-06-29\"\nbreak_dates = [2020-02-20]");
        assert_eq!(cfg.start, NaiveDate::from_ymd_opt(2015, 1, 6));
        assert_eq!(cfg.end, NaiveDate::from_ymd_opt(2023, 6, 29));
        assert_eq!(cfg.break_dates, vec![NaiveDate::from_ymd_opt(2020, 2, 20).unwrap()]);
    }

    #[test]
    fn lag_forms() {
        let (_d, cfg) = with_inputs("lag = 2");
        assert_eq!(cfg.lag, Lag::Fixed(2));
        let (_d, cfg) = with_inputs("lag = \"auto\"\np_max = 3");
        assert_eq!((cfg.lag, cfg.p_max), (Lag::Auto, 3));
        assert_eq!("4".parse::<Lag>().unwrap(), Lag::Fixed(4));
        assert!("0".parse::<Lag>().is_err());
        assert!(RunConfig::from_toml("series = []\nlag = 0", ".").is_err());
        assert!(RunConfig::from_toml("series = []\nlag = \"often\"", ".").is_err());
    }

    #[test]
    fn validation_errors_are_config_errors() {
        for body in [
            "start = 2020-01-05\nend = 2020-01-01",
            "horizon = 0",
            "[tvp]\nkappa1 = 1.5",
            "[tvp]\nkappa2 = 0.0",
            "edge_threshold = 2.0",
            "break_dates = [2020-03-01, 2020-02-01]",
            "break_dates = [2020-03-01]\nsegment_labels = [\"a\"]",
        ] {
            let (_d, cfg) = with_inputs(body);
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{body}");
        }
        let cfg = RunConfig::from_toml("[[series]]\nticker = \"A\"\npath = \"missing.csv\"", "/nonexistent").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml("bogus = 1\nseries = []", "."), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_take_precedence() {
        let (_d, mut cfg) = with_inputs("horizon = 5\n[tvp]\nkappa1 = 0.98");
        cfg.apply(&Overrides {
            horizon: Some(12),
            lag: Some(Lag::Fixed(1)),
            output_dir: Some("elsewhere".into()),
            ..Overrides::default()
        });
        assert_eq!(cfg.horizon, 12);
        assert_eq!(cfg.lag, Lag::Fixed(1));
        assert_eq!(cfg.tvp.kappa1, 0.98);
        assert!(cfg.output_path().ends_with("elsewhere"));
    }
}
