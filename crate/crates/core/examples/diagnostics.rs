//! Descriptive statistics, ADF and a Chow break test on a simulated panel.
//!
//!     cargo run --example diagnostics

use nalgebra::DMatrix;
use spillover::diagnostics::{adf_test, chow_test, describe, stars, Deterministic, MaxLag};
use spillover::simulate::{simulate_var, three_asset_process};

fn main() -> spillover::Result<()> {
    let panel = simulate_var(&three_asset_process(), 800, 100, 3)?;

    println!("{:<6} {:>9} {:>8} {:>8} {:>10} {:>10}", "", "mean", "sd", "skew", "JB", "ADF tau");
    for (i, ticker) in panel.tickers.iter().enumerate() {
        let x = panel.column(i);
        let d = describe(&x)?;
        let adf = adf_test(&x, MaxLag::Auto, Deterministic::Constant)?;
        println!(
            "{ticker:<6} {:>9.4} {:>8.4} {:>8.3} {:>7.2}{:<3} {:>7.2}{:<3}",
            d.mean,
            d.sd,
            d.skewness,
            d.jb_stat,
            stars(d.jb_pvalue),
            adf.statistic,
            stars(adf.pvalue)
        );
    }

    // Chow on the first series' AR(1) regression, break at the midpoint
    let y = panel.column(0);
    let n = y.len() - 1;
    let x = DMatrix::from_fn(n, 2, |r, c| if c == 0 { 1.0 } else { y[r] });
    let chow = chow_test(&y[1..], &x, n / 2)?;
    println!("\nChow at row {}: F = {:.3} on ({}, {}), p = {:.3}", n / 2, chow.f_stat, chow.df_num, chow.df_den, chow.pvalue);
    Ok(())
}
