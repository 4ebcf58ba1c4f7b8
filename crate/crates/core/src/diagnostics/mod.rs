//! Pre-estimation battery: moments and normality, serial correlation in
//! squares, unit roots and structural breaks.

mod adf;
mod chow;
mod describe;
mod ljung_box;
mod mackinnon;
pub mod report;

pub use adf::{adf_test, auto_max_lag, AdfResult, Deterministic, MaxLag};
pub use chow::{chow_test, ChowResult};
pub use describe::{describe, describe_with_lags, DescriptiveStats, DEFAULT_Q2_LAGS};
pub use ljung_box::{ljung_box, LjungBox};
pub use mackinnon::mackinnon_pvalue;

/// Significance marker used in rendered tables.
pub fn stars(pvalue: f64) -> &'static str {
    if pvalue <= 0.005 {
        "***"
    } else if pvalue <= 0.01 {
        "**"
    } else if pvalue <= 0.05 {
        "*"
    } else if pvalue <= 0.1 {
        "."
    } else {
        ""
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}
