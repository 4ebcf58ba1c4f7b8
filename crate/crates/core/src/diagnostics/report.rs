//! Text and CSV renderings of the diagnostics tables.

use chrono::NaiveDate;

use super::{stars, AdfResult, ChowResult, DescriptiveStats};
use crate::format::{csv_text, g17, sig, text_table};

#[derive(Debug, Clone)]
pub struct SeriesDiagnostics {
    pub ticker: String,
    pub stats: DescriptiveStats,
    pub adf: AdfResult,
}

#[derive(Debug, Clone)]
pub enum ChowOutcome {
    Tested(ChowResult),
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct ChowRow {
    pub ticker: String,
    pub break_date: NaiveDate,
    pub outcome: ChowOutcome,
}

fn starred(value: String, pvalue: f64) -> String {
    format!("{value}{}", stars(pvalue))
}

/// Descriptive statistics in aligned text; kurtosis is excess kurtosis.
pub fn descriptive_text(rows: &[SeriesDiagnostics]) -> String {
    let lags = rows.first().map_or(20, |r| r.stats.q2_lags);
    let mut table = vec![vec![
        "Variable".to_string(),
        "Mean".into(),
        "Median".into(),
        "SD".into(),
        "Skewness".into(),
        "Kurtosis(excess)".into(),
        "J-B test".into(),
        format!("Q2({lags})"),
    ]];
    for r in rows {
        let s = &r.stats;
        table.push(vec![
            r.ticker.clone(),
            format!("{:.4}", s.mean),
            format!("{:.4}", s.median),
            format!("{:.4}", s.sd),
            starred(format!("{:.3}", s.skewness), s.skewness_pvalue),
            starred(format!("{:.3}", s.excess_kurtosis), s.kurtosis_pvalue),
            starred(format!("{:.3}", s.jb_stat), s.jb_pvalue),
            starred(format!("{:.3}", s.q2_stat), s.q2_pvalue),
        ]);
    }
    let mut out = text_table(&table);
    out.push_str("(. p-value <= 0.1, * p-value <= 0.05, ** p-value <= 0.01, *** p-value <= 0.005)\n");
    out
}

pub fn descriptive_csv(rows: &[SeriesDiagnostics]) -> String {
    let mut table = vec![[
        "ticker",
        "n",
        "mean",
        "median",
        "sd",
        "skewness",
        "skewness_pvalue",
        "excess_kurtosis",
        "kurtosis_pvalue",
        "jb_stat",
        "jb_pvalue",
        "q2_stat",
        "q2_lags",
        "q2_pvalue",
    ]
    .map(String::from)
    .to_vec()];
    for r in rows {
        let s = &r.stats;
        table.push(vec![
            r.ticker.clone(),
            s.n.to_string(),
            g17(s.mean),
            g17(s.median),
            g17(s.sd),
            g17(s.skewness),
            g17(s.skewness_pvalue),
            g17(s.excess_kurtosis),
            g17(s.kurtosis_pvalue),
            g17(s.jb_stat),
            g17(s.jb_pvalue),
            g17(s.q2_stat),
            s.q2_lags.to_string(),
            g17(s.q2_pvalue),
        ]);
    }
    csv_text(&table)
}

/// Unit-root table: `statistic<stars>(lag)` and the p-value.
pub fn adf_text(rows: &[SeriesDiagnostics]) -> String {
    let mut table = vec![vec![
        "Ticker".to_string(),
        "ADF (Lag)".into(),
        "p-value".into(),
    ]];
    for r in rows {
        table.push(vec![
            r.ticker.clone(),
            format!("{:.2}{}({})", r.adf.statistic, stars(r.adf.pvalue), r.adf.chosen_lag),
            sig(r.adf.pvalue, 3),
        ]);
    }
    text_table(&table)
}

pub fn adf_csv(rows: &[SeriesDiagnostics]) -> String {
    let mut table = vec![["ticker", "statistic", "lag", "max_lag", "nobs", "pvalue", "deterministic"]
        .map(String::from)
        .to_vec()];
    for r in rows {
        let a = &r.adf;
        table.push(vec![
            r.ticker.clone(),
            g17(a.statistic),
            a.chosen_lag.to_string(),
            a.max_lag.to_string(),
            a.nobs.to_string(),
            g17(a.pvalue),
            serde_json::to_value(a.deterministic)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
        ]);
    }
    csv_text(&table)
}

pub fn chow_text(rows: &[ChowRow]) -> String {
    let mut table = vec![vec![
        "Ticker".to_string(),
        "Break".into(),
        "F".into(),
        "df".into(),
        "p-value".into(),
    ]];
    for r in rows {
        let date = r.break_date.to_string();
        match &r.outcome {
            ChowOutcome::Tested(c) => table.push(vec![
                r.ticker.clone(),
                date,
                starred(format!("{:.3}", c.f_stat), c.pvalue),
                format!("({}, {})", c.df_num, c.df_den),
                sig(c.pvalue, 3),
            ]),
            ChowOutcome::Skipped(why) => {
                table.push(vec![r.ticker.clone(), date, format!("skipped: {why}")])
            }
        }
    }
    text_table(&table)
}

pub fn chow_csv(rows: &[ChowRow]) -> String {
    let mut table = vec![["ticker", "break_date", "f_stat", "df_num", "df_den", "pvalue", "status"]
        .map(String::from)
        .to_vec()];
    for r in rows {
        let date = r.break_date.to_string();
        table.push(match &r.outcome {
            ChowOutcome::Tested(c) => vec![
                r.ticker.clone(),
                date,
                g17(c.f_stat),
                c.df_num.to_string(),
                c.df_den.to_string(),
                g17(c.pvalue),
                "ok".into(),
            ],
            ChowOutcome::Skipped(why) => vec![
                r.ticker.clone(),
                date,
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("skipped: {why}"),
            ],
        });
    }
    csv_text(&table)
}
