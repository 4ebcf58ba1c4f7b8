use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::linalg::ols_vec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChowResult {
    pub f_stat: f64,
    /// Number of regressors (restrictions under the null).
    pub df_num: usize,
    pub df_den: usize,
    pub pvalue: f64,
    /// First row of the second regime.
    pub break_index: usize,
    pub break_date: Option<NaiveDate>,
}

/// Classic Chow F-test for a coefficient break at `break_index`.
pub fn chow_test(y: &[f64], x: &DMatrix<f64>, break_index: usize) -> Result<ChowResult> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} responses for {n} regressor rows",
            y.len()
        )));
    }
    if break_index <= k || n - break_index.min(n) <= k {
        return Err(Error::InsufficientData(format!(
            "break at row {break_index} leaves a sub-sample with no more rows than the {k} regressors"
        )));
    }
    let ssr = |rows: std::ops::Range<usize>| -> Result<f64> {
        let xs = x.rows(rows.start, rows.len()).into_owned();
        let ys = DVector::from_column_slice(&y[rows]);
        Ok(ols_vec(&xs, &ys)?.ssr(0))
    };
    let pooled = ssr(0..n)?;
    let first = ssr(0..break_index)?;
    let second = ssr(break_index..n)?;
    let unrestricted = first + second;
    if !(unrestricted > 0.0) {
        return Err(Error::Degenerate("both regimes fit exactly".into()));
    }
    let df_den = n - 2 * k;
    let f_stat = (((pooled - unrestricted) / k as f64) / (unrestricted / df_den as f64)).max(0.0);
    let pvalue = FisherSnedecor::new(k as f64, df_den as f64)
        .expect("positive degrees of freedom")
        .sf(f_stat);
    Ok(ChowResult {
        f_stat,
        df_num: k,
        df_den,
        pvalue,
        break_index,
        break_date: None,
    })
}
