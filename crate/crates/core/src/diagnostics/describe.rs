use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::{ljung_box, mean, LjungBox};
use crate::error::{Error, Result};

pub const DEFAULT_Q2_LAGS: usize = 20;

const MIN_LEN: usize = 8;

/// Table-4 style summary of one return series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
    /// Moment-based skewness m3 / m2^1.5.
    pub skewness: f64,
    /// Two-sided p-value of S / sqrt(6/n) against N(0,1).
    pub skewness_pvalue: f64,
    /// Excess kurtosis m4 / m2² − 3.
    pub excess_kurtosis: f64,
    /// Two-sided p-value of K / sqrt(24/n) against N(0,1).
    pub kurtosis_pvalue: f64,
    pub jb_stat: f64,
    pub jb_pvalue: f64,
    pub q2_stat: f64,
    /// Lags actually used; below the requested count when the series is short.
    pub q2_lags: usize,
    pub q2_pvalue: f64,
}

pub fn describe(series: &[f64]) -> Result<DescriptiveStats> {
    describe_with_lags(series, DEFAULT_Q2_LAGS)
}

pub fn describe_with_lags(series: &[f64], q2_lags: usize) -> Result<DescriptiveStats> {
    let n = series.len();
    if n < MIN_LEN {
        return Err(Error::InsufficientData(format!(
            "{n} observations; at least {MIN_LEN} required"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite observation".into()));
    }
    if q2_lags == 0 {
        return Err(Error::InvalidArgument("q2_lags must be positive".into()));
    }
    let nf = n as f64;
    let mu = mean(series);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in series {
        let d = x - mu;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    // Relative to the level so that a large constant offset with rounding noise still counts.
    if m2 <= (f64::EPSILON * mu.abs()).powi(2) || m2 == 0.0 {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;
    let jb_stat = nf / 6.0 * (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
    let jb_pvalue = ChiSquared::new(2.0).expect("valid df").sf(jb_stat);

    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let two_sided = |z: f64| (2.0 * std_normal.sf(z.abs())).min(1.0);
    let skewness_pvalue = two_sided(skewness / (6.0 / nf).sqrt());
    let kurtosis_pvalue = two_sided(excess_kurtosis / (24.0 / nf).sqrt());

    let lags = q2_lags.min(n - 2);
    // Constant squares (e.g. a ±c alternation) carry no volatility clustering.
    let q2 = match ljung_box(series, lags, true) {
        Err(Error::Degenerate(_)) => LjungBox {
            stat: 0.0,
            lags,
            pvalue: 1.0,
        },
        other => other?,
    };

    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };

    Ok(DescriptiveStats {
        n,
        mean: mu,
        median,
        sd: (m2 * nf / (nf - 1.0)).sqrt(),
        skewness,
        skewness_pvalue,
        excess_kurtosis,
        kurtosis_pvalue,
        jb_stat,
        jb_pvalue,
        q2_stat: q2.stat,
        q2_lags: lags,
        q2_pvalue: q2.pvalue,
    })
}
