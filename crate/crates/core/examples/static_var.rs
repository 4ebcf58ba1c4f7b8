//! Lag selection and OLS fit of a VAR on simulated returns.
//!
//!     cargo run --example static_var

use spillover::simulate::{simulate_var, three_asset_process};
use spillover::var::{fit_var, lag_criteria, select_lag};

fn main() -> spillover::Result<()> {
    let truth = three_asset_process();
    let panel = simulate_var(&truth, 1500, 200, 11)?;

    let bic = lag_criteria(&panel, 5, true)?;
    for (p, v) in bic.iter().enumerate() {
        println!("p = {}  BIC = {v:.2}", p + 1);
    }
    let p = select_lag(&panel, 5, true)?;
    let est = fit_var(&panel, p, true)?;
    println!("\nselected p = {p}, nobs = {}, spectral radius = {:.3}", est.nobs, est.spectral_radius);
    println!("estimated Phi_1:\n{:.3}", est.model.coefficients[0]);
    println!("true Phi_1:\n{:.3}", truth.model().coefficients[0]);
    Ok(())
}
