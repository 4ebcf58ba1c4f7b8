//! End-to-end runs driven by a [`RunConfig`]: ingest, diagnostics, static and
//! dynamic connectedness, network export.
//!
//! Every stage writes into its own directory under the configured output
//! directory, together with a `manifest.json` listing resolved parameters and
//! written files. Outputs carry no timestamps, so re-running a configuration
//! reproduces the tree byte for byte.

mod config;

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::connectedness::{
    connectedness, dynamic_indices, pairwise_csv, report_csv, report_text, ConnectednessReport, DynamicConnectedness,
};
use crate::data::{align, load_csv, to_returns, AlignedPrices, ReturnPanel, Transform};
use crate::diagnostics::report::{
    adf_csv, adf_text, chow_csv, chow_text, descriptive_csv, descriptive_text, ChowOutcome, ChowRow, SeriesDiagnostics,
};
use crate::diagnostics::{adf_test, chow_test, describe_with_lags, Deterministic, MaxLag};
use crate::error::{Error, Result};
use crate::format::{csv_text, g17};
use crate::network::{build_network, emit_dot, emit_json};
use crate::simulate::{seven_asset_fixture, three_asset_fixture, Fixture};
use crate::tvp::{filter, TvpPath};
use crate::var::{fit_var, select_lag, VarEstimate};

pub use config::{Lag, Overrides, RunConfig, SeriesConfig, TvpSettings};

/// Rows read per input file.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestRecord {
    pub ticker: String,
    pub path: PathBuf,
    pub rows: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub panel: ReturnPanel,
    pub ingest: Vec<IngestRecord>,
}

/// What a run wrote, relative to the output directory, plus warnings for the user.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

struct Out {
    root: PathBuf,
    files: Vec<String>,
}

impl Out {
    fn new(root: PathBuf) -> Self {
        Out { root, files: Vec::new() }
    }

    fn write(&mut self, rel: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(rel.to_string());
        Ok(())
    }

    fn json(&mut self, rel: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
        text.push('\n');
        self.write(rel, text)
    }
}

/// Load, align, restrict to the date range and difference every configured series.
pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    cfg.validate()?;
    let mut series = Vec::with_capacity(cfg.series.len());
    let mut ingest = Vec::with_capacity(cfg.series.len());
    for s in &cfg.series {
        let path = cfg.resolve(&s.path);
        let loaded = load_csv(&path, &s.ticker, &s.schema())?;
        ingest.push(IngestRecord {
            ticker: s.ticker.clone(),
            path: s.path.clone(),
            rows: loaded.series.len(),
            rejected: loaded.rejected,
        });
        series.push(loaded.series);
    }
    let aligned = restrict_prices(align(&series)?, cfg.start, cfg.end);
    if aligned.dates.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} aligned price rows inside the date range",
            aligned.dates.len()
        )));
    }
    let transforms: Vec<Transform> = cfg.series.iter().map(|s| s.transform).collect();
    let panel = to_returns(&aligned, &transforms)?;
    Ok(Inputs { panel, ingest })
}

fn restrict_prices(p: AlignedPrices, start: Option<NaiveDate>, end: Option<NaiveDate>) -> AlignedPrices {
    let lo = start.map_or(0, |s| p.dates.partition_point(|d| *d < s));
    let hi = end.map_or(p.dates.len(), |e| p.dates.partition_point(|d| *d <= e)).max(lo);
    AlignedPrices {
        tickers: p.tickers,
        dates: p.dates[lo..hi].to_vec(),
        prices: p.prices.rows(lo, hi - lo).into_owned(),
    }
}

fn ingest_warnings(inputs: &Inputs) -> Vec<String> {
    inputs
        .ingest
        .iter()
        .filter(|r| r.rejected > 0)
        .map(|r| format!("{}: skipped {} rows with unusable prices", r.ticker, r.rejected))
        .collect()
}

fn manifest(cfg: &RunConfig, command: &str, inputs: &Inputs) -> Value {
    let mut settings = serde_json::to_value(cfg).expect("config serializes");
    if let Value::Object(map) = &mut settings {
        map.remove("output_dir");
    }
    let panel = &inputs.panel;
    json!({
        "tool": "spillover",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": settings,
        "inputs": inputs.ingest.iter().map(|r| json!({
            "ticker": r.ticker,
            "path": r.path.display().to_string(),
            "rows": r.rows,
            "rejected_rows": r.rejected,
        })).collect::<Vec<_>>(),
        "panel": {
            "tickers": panel.tickers,
            "rows": panel.n_obs(),
            "first_date": panel.dates.first().map(|d| d.to_string()),
            "last_date": panel.dates.last().map(|d| d.to_string()),
            "transforms": panel.transforms.iter().map(|t| t.as_str()).collect::<Vec<_>>(),
        },
    })
}

fn finish(mut out: Out, dir: &str, mut man: Value, warnings: Vec<String>) -> Result<RunOutcome> {
    let rel = format!("{dir}/manifest.json");
    let mut files = out.files.clone();
    files.push(rel.clone());
    man["files"] = json!(files);
    man["warnings"] = json!(warnings);
    out.json(&rel, &man)?;
    Ok(RunOutcome {
        output_dir: out.root,
        files: out.files,
        warnings,
    })
}

/// Per-series descriptive statistics and ADF tests, and Chow tests at each break date.
pub fn diagnostics_tables(panel: &ReturnPanel, breaks: &[NaiveDate], q2_lags: usize) -> Result<(Vec<SeriesDiagnostics>, Vec<ChowRow>)> {
    let mut rows = Vec::with_capacity(panel.n_vars());
    let mut chow = Vec::new();
    for (c, ticker) in panel.tickers.iter().enumerate() {
        let y = panel.column(c);
        let with_ticker = |e: Error| match e {
            Error::Degenerate(m) => Error::Degenerate(format!("{ticker}: {m}")),
            Error::InsufficientData(m) => Error::InsufficientData(format!("{ticker}: {m}")),
            Error::Singular(m) => Error::Singular(format!("{ticker}: {m}")),
            other => other,
        };
        rows.push(SeriesDiagnostics {
            ticker: ticker.clone(),
            stats: describe_with_lags(&y, q2_lags).map_err(with_ticker)?,
            adf: adf_test(&y, MaxLag::Auto, Deterministic::Constant).map_err(with_ticker)?,
        });
        // Return on a constant and its own first lag.
        let x = DMatrix::from_fn(y.len() - 1, 2, |r, k| if k == 0 { 1.0 } else { y[r] });
        let resp = &y[1..];
        let dates = &panel.dates[1..];
        for &b in breaks {
            let outcome = if b <= dates[0] || b > *dates.last().expect("non-empty") {
                ChowOutcome::Skipped("out of range".into())
            } else {
                let idx = dates.partition_point(|d| *d < b);
                match chow_test(resp, &x, idx) {
                    Ok(mut r) => {
                        r.break_date = Some(dates[idx]);
                        ChowOutcome::Tested(r)
                    }
                    Err(e) => ChowOutcome::Skipped(e.to_string()),
                }
            };
            chow.push(ChowRow {
                ticker: ticker.clone(),
                break_date: b,
                outcome,
            });
        }
    }
    Ok((rows, chow))
}

fn write_diagnostics(out: &mut Out, cfg: &RunConfig, panel: &ReturnPanel) -> Result<()> {
    let (rows, chow) = diagnostics_tables(panel, &cfg.break_dates, cfg.q2_lags)?;
    out.write("diagnostics/descriptive.txt", descriptive_text(&rows))?;
    out.write("diagnostics/descriptive.csv", descriptive_csv(&rows))?;
    out.write("diagnostics/adf.txt", adf_text(&rows))?;
    out.write("diagnostics/adf.csv", adf_csv(&rows))?;
    if !chow.is_empty() {
        out.write("diagnostics/chow.txt", chow_text(&chow))?;
        out.write("diagnostics/chow.csv", chow_csv(&chow))?;
    }
    Ok(())
}

pub fn run_diagnostics(cfg: &RunConfig) -> Result<RunOutcome> {
    let inputs = load_inputs(cfg)?;
    let mut out = Out::new(cfg.output_path());
    write_diagnostics(&mut out, cfg, &inputs.panel)?;
    let warnings = ingest_warnings(&inputs);
    let man = manifest(cfg, "diagnostics", &inputs);
    finish(out, "diagnostics", man, warnings)
}

fn require_system(panel: &ReturnPanel) -> Result<()> {
    if panel.n_vars() < 2 {
        return Err(Error::Config(format!(
            "connectedness needs at least two series; {} configured",
            panel.n_vars()
        )));
    }
    Ok(())
}

fn lag_order(cfg: &RunConfig, panel: &ReturnPanel) -> Result<(usize, Option<usize>)> {
    match cfg.lag {
        Lag::Fixed(p) => Ok((p, None)),
        Lag::Auto => Ok((select_lag(panel, cfg.p_max, cfg.intercept)?, Some(cfg.p_max))),
    }
}

/// Static VAR on the whole panel.
pub fn estimate_static(cfg: &RunConfig, panel: &ReturnPanel) -> Result<VarEstimate> {
    require_system(panel)?;
    let (p, from) = lag_order(cfg, panel)?;
    let mut est = fit_var(panel, p, cfg.intercept)?;
    est.selected_from = from;
    Ok(est)
}

fn write_report(out: &mut Out, dir: &str, report: &ConnectednessReport, threshold: f64) -> Result<()> {
    out.write(&format!("{dir}/connectedness.txt"), report_text(report))?;
    out.write(&format!("{dir}/connectedness.csv"), report_csv(report))?;
    out.write(&format!("{dir}/connectedness.json"), report.to_json())?;
    out.write(&format!("{dir}/pairwise.csv"), pairwise_csv(report))?;
    let net = build_network(report, threshold)?;
    out.write(&format!("{dir}/network.dot"), emit_dot(&net))?;
    out.write(&format!("{dir}/network.json"), emit_json(&net))?;
    Ok(())
}

/// Diagnostics, then the full-sample VAR and its connectedness table and network.
pub fn run_static(cfg: &RunConfig) -> Result<RunOutcome> {
    let inputs = load_inputs(cfg)?;
    let panel = &inputs.panel;
    require_system(panel)?;
    let mut out = Out::new(cfg.output_path());
    write_diagnostics(&mut out, cfg, panel)?;
    let est = estimate_static(cfg, panel)?;
    let report = connectedness(&est.model, cfg.horizon, "static")?;
    let mut returns = Vec::new();
    panel
        .write_csv(&mut returns)
        .map_err(|e| Error::io(out.root.join("static/returns.csv"), e))?;
    out.write("static/returns.csv", returns)?;
    out.write("static/var_estimate.txt", est.to_text())?;
    write_report(&mut out, "static", &report, cfg.edge_threshold)?;

    let mut warnings = ingest_warnings(&inputs);
    if !est.stable {
        warnings.push(format!(
            "estimated VAR is not stable (spectral radius {:.4})",
            est.spectral_radius
        ));
    }
    let mut man = manifest(cfg, "static", &inputs);
    man["static"] = json!({
        "lag_order": est.lag_order(),
        "lag_selection": est.selected_from.map_or("fixed".to_string(), |p| format!("bic p_max={p}")),
        "nobs": est.nobs,
        "bic": est.bic,
        "spectral_radius": est.spectral_radius,
        "stable": est.stable,
        "horizon": cfg.horizon,
        "tci": report.tci,
    });
    finish(out, "static", man, warnings)
}

/// Filtered path and per-date connectedness for a panel.
pub fn estimate_dynamic(cfg: &RunConfig, panel: &ReturnPanel) -> Result<(TvpPath, DynamicConnectedness)> {
    require_system(panel)?;
    let (p, _) = lag_order(cfg, panel)?;
    let path = filter(panel, &cfg.tvp_config(p))?;
    let dynamic = dynamic_indices(&path, cfg.horizon)?;
    Ok((path, dynamic))
}

fn series_csv(d: &DynamicConnectedness) -> (String, String, String) {
    let n = d.tickers.len();
    let mut tci = vec![vec!["date".to_string(), "tci".into()]];
    let mut net = vec![std::iter::once("date".to_string()).chain(d.tickers.iter().cloned()).collect::<Vec<_>>()];
    let mut header = vec!["date".to_string()];
    for i in 0..n {
        for j in i + 1..n {
            header.push(format!("{}->{}", d.tickers[i], d.tickers[j]));
        }
    }
    let mut npdc = vec![header];
    for (date, r) in d.dates.iter().zip(&d.reports) {
        let day = date.to_string();
        tci.push(vec![day.clone(), g17(r.tci)]);
        net.push(std::iter::once(day.clone()).chain(r.net.iter().map(|v| g17(*v))).collect());
        let mut row = vec![day];
        for i in 0..n {
            for j in i + 1..n {
                row.push(g17(r.npdc[(i, j)]));
            }
        }
        npdc.push(row);
    }
    (csv_text(&tci), csv_text(&net), csv_text(&npdc))
}

/// Filter, per-date indices, time-averaged tables for the full sample and each segment.
pub fn run_dynamic(cfg: &RunConfig) -> Result<RunOutcome> {
    let inputs = load_inputs(cfg)?;
    let panel = &inputs.panel;
    require_system(panel)?;
    let split = cfg.split();
    // Validates the break dates against the panel before the filter runs.
    split.segment_ranges(&panel.dates)?;
    let (p, from) = lag_order(cfg, panel)?;
    let tvp_cfg = cfg.tvp_config(p);
    let path = filter(panel, &tvp_cfg)?;
    let dynamic = dynamic_indices(&path, cfg.horizon)?;

    let mut out = Out::new(cfg.output_path());
    let mut buf = Vec::new();
    let header: Vec<String> = vec![
        format!("kappa1 = {}", tvp_cfg.kappa1),
        format!("kappa2 = {}", tvp_cfg.kappa2),
        format!("prior_window = {}", tvp_cfg.prior_window),
        format!("lag_order = {}", tvp_cfg.lag_order),
        format!("inflation = {}", tvp_cfg.inflation),
        format!("intercept = {}", tvp_cfg.intercept),
        format!("include_prior_window = {}", tvp_cfg.include_prior_window),
    ];
    path.write_csv(&mut buf, &header)
        .map_err(|e| Error::io(out.root.join("dynamic/tvp_path.csv"), e))?;
    out.write("dynamic/tvp_path.csv", buf)?;
    let (tci, net, npdc) = series_csv(&dynamic);
    out.write("dynamic/tci.csv", tci)?;
    out.write("dynamic/net.csv", net)?;
    out.write("dynamic/npdc.csv", npdc)?;

    let full = dynamic.average("full")?;
    write_report(&mut out, "dynamic/full", &full, cfg.edge_threshold)?;
    let mut segments = Vec::new();
    let labels = split.segment_labels();
    let mut bounds: Vec<Option<NaiveDate>> = vec![None];
    bounds.extend(split.break_dates.iter().copied().map(Some));
    bounds.push(None);
    if !split.break_dates.is_empty() {
        for (k, label) in labels.iter().enumerate() {
            let lo = bounds[k].unwrap_or(NaiveDate::MIN);
            let range = dynamic.date_range(lo, bounds[k + 1]);
            if range.is_empty() {
                return Err(Error::InsufficientData(format!(
                    "segment {label} has no dynamic estimates (the prior window may cover it)"
                )));
            }
            let report = dynamic.average_over(range.clone(), label)?;
            write_report(&mut out, &format!("dynamic/{label}"), &report, cfg.edge_threshold)?;
            segments.push(json!({
                "label": label,
                "first_date": dynamic.dates[range.start].to_string(),
                "last_date": dynamic.dates[range.end - 1].to_string(),
                "dates": range.len(),
                "tci": report.tci,
            }));
        }
    }

    let mut warnings = ingest_warnings(&inputs);
    if !dynamic.failures.is_empty() {
        warnings.push(format!("{} dates failed to decompose and were skipped", dynamic.failures.len()));
    }
    let mut man = manifest(cfg, "dynamic", &inputs);
    man["dynamic"] = json!({
        "lag_order": p,
        "lag_selection": from.map_or("fixed".to_string(), |q| format!("bic p_max={q}")),
        "horizon": cfg.horizon,
        "tvp": {
            "kappa1": tvp_cfg.kappa1,
            "kappa2": tvp_cfg.kappa2,
            "prior_window": tvp_cfg.prior_window,
            "inflation": tvp_cfg.inflation,
            "include_prior_window": tvp_cfg.include_prior_window,
            "intercept": tvp_cfg.intercept,
        },
        "path_length": path.len(),
        "first_date": path.dates.first().map(|d| d.to_string()),
        "last_date": path.dates.last().map(|d| d.to_string()),
        "psd_repairs": path.repairs,
        "failures": dynamic.failures.iter().map(|(d, why)| json!({"date": d.to_string(), "error": why})).collect::<Vec<_>>(),
        "full_tci": full.tci,
        "edge_threshold": cfg.edge_threshold,
        "segments": segments,
    });
    finish(out, "dynamic", man, warnings)
}

/// Rebuild the network files from a saved `connectedness.json`.
pub fn run_network(report_path: &Path, edge_threshold: f64, output_dir: &Path) -> Result<RunOutcome> {
    let text = std::fs::read_to_string(report_path).map_err(|e| Error::io(report_path, e))?;
    let report = ConnectednessReport::from_json(&text)?;
    let net = build_network(&report, edge_threshold)?;
    let mut out = Out::new(output_dir.to_path_buf());
    out.write("network.dot", emit_dot(&net))?;
    out.write("network.json", emit_json(&net))?;
    Ok(RunOutcome {
        output_dir: out.root,
        files: out.files,
        warnings: Vec::new(),
    })
}

/// Which synthetic system [`run_simulate`] writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    ThreeAsset,
    SevenAsset,
}

impl std::str::FromStr for FixtureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "three" | "3" | "three-asset" => Ok(FixtureKind::ThreeAsset),
            "seven" | "7" | "seven-asset" => Ok(FixtureKind::SevenAsset),
            _ => Err(Error::Config(format!("unknown fixture {s:?}; use \"three\" or \"seven\""))),
        }
    }
}

pub fn make_fixture(kind: FixtureKind, rows: usize, seed: u64) -> Result<Fixture> {
    if rows < 10 {
        return Err(Error::Config(format!("at least 10 rows are needed, got {rows}")));
    }
    match kind {
        FixtureKind::ThreeAsset => three_asset_fixture(rows, seed),
        FixtureKind::SevenAsset => seven_asset_fixture(rows, seed),
    }
}

/// Write one price CSV per ticker and a `config.toml` that runs on them.
///
/// The config splits the sample at the weekday nearest its middle.
pub fn run_simulate(kind: FixtureKind, rows: usize, seed: u64, output_dir: &Path) -> Result<RunOutcome> {
    let fx = make_fixture(kind, rows, seed)?;
    let mut out = Out::new(output_dir.to_path_buf());
    let mut config = String::new();
    config.push_str(&format!("# synthetic {}-asset fixture, {rows} return rows, seed {seed}\n", fx.series.len()));
    let equities = &fx.series[0];
    let mid = equities.observations[equities.len() / 2].0;
    config.push_str("lag = 1\nhorizon = 10\n");
    config.push_str(&format!("break_dates = [{mid}]\nsegment_labels = [\"before\", \"after\"]\n"));
    config.push_str(&format!("seed = {seed}\noutput_dir = \"output\"\n"));
    for s in &fx.series {
        let rows: Vec<Vec<String>> = std::iter::once(vec!["date".to_string(), "price".into()])
            .chain(s.observations.iter().map(|(d, p)| vec![d.to_string(), p.to_string()]))
            .collect();
        let file = format!("{}.csv", s.ticker);
        out.write(&file, csv_text(&rows))?;
        config.push_str(&format!("\n[[series]]\nticker = \"{}\"\npath = \"{file}\"\n", s.ticker));
    }
    out.write("config.toml", config)?;
    Ok(RunOutcome {
        output_dir: out.root,
        files: out.files,
        warnings: Vec::new(),
    })
}
