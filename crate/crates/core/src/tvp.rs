//! Time-varying-parameter VAR estimated with a forgetting-factor Kalman filter.
//!
//! The coefficient vector follows a random walk. Its state noise is not
//! estimated: the predicted covariance is the previous posterior inflated by
//! `1/kappa1`. The innovation covariance is an exponentially weighted average
//! of one-step prediction errors with decay `kappa2`.
//!
//! The state stacks the equations: for equation `i` with `k` regressors
//! (`[1, x_{t−1}', …, x_{t−p}']`), entries `i·k .. (i+1)·k`.

use std::io::Write;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::ReturnPanel;
use crate::error::{Error, Result};
use crate::format::g12;
use crate::linalg::{clip_to_psd, min_eigenvalue, ols, symmetrize};
use crate::var::{unstack, var_design, VarModel};

/// Most negative eigenvalue (relative to the largest diagonal entry) tolerated and repaired.
const PSD_REPAIR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TvpConfig {
    /// State forgetting factor in (0, 1].
    pub kappa1: f64,
    /// Innovation-covariance decay in (0, 1].
    pub kappa2: f64,
    /// Regression rows used for the OLS prior.
    pub prior_window: usize,
    pub lag_order: usize,
    /// Multiplier on the OLS coefficient covariance for the prior state covariance.
    pub inflation: f64,
    pub intercept: bool,
    /// Re-filter the prior window instead of starting after it.
    pub include_prior_window: bool,
}

impl Default for TvpConfig {
    fn default() -> Self {
        TvpConfig {
            kappa1: 0.99,
            kappa2: 0.96,
            prior_window: 200,
            lag_order: 1,
            inflation: 4.0,
            intercept: true,
            include_prior_window: false,
        }
    }
}

impl TvpConfig {
    pub fn validate(&self, n_vars: usize) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.kappa1) || !unit(self.kappa2) {
            return Err(Error::Config(format!(
                "forgetting factors must lie in (0, 1]; got kappa1 = {}, kappa2 = {}",
                self.kappa1, self.kappa2
            )));
        }
        if self.lag_order == 0 {
            return Err(Error::Config("lag order must be positive".into()));
        }
        if !(self.inflation > 0.0 && self.inflation.is_finite()) {
            return Err(Error::Config(format!(
                "prior inflation must be positive; got {}",
                self.inflation
            )));
        }
        let min = n_vars * self.lag_order + 1;
        if self.prior_window <= min {
            return Err(Error::Config(format!(
                "prior window {} must exceed N·p + 1 = {min}",
                self.prior_window
            )));
        }
        Ok(())
    }

    fn n_regressors(&self, n_vars: usize) -> usize {
        n_vars * self.lag_order + usize::from(self.intercept)
    }
}

/// Gaussian prior for the stacked state plus the initial innovation covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    pub state_mean: DVector<f64>,
    pub state_cov: DMatrix<f64>,
    pub sigma0: DMatrix<f64>,
}

/// OLS on the first `prior_window` regression rows.
///
/// The state covariance is `inflation · (Σ̂ ⊗ (X'X)^{-1})` in equation-major order,
/// so `inflation = 1` reproduces the OLS coefficient covariance exactly.
pub fn init_prior(panel: &ReturnPanel, cfg: &TvpConfig) -> Result<Prior> {
    let n = panel.n_vars();
    cfg.validate(n)?;
    let p = cfg.lag_order;
    if panel.n_obs() < p + cfg.prior_window {
        return Err(Error::InsufficientData(format!(
            "{} rows; the prior needs {} lags plus a {}-row window",
            panel.n_obs(),
            p,
            cfg.prior_window
        )));
    }
    let window = panel.slice_rows(0..p + cfg.prior_window);
    let (x, y) = var_design(&window.values, p, cfg.intercept, p);
    let fit = ols(&x, &y)?;
    let k = x.ncols();
    let dof = fit.nobs() - n * p - usize::from(cfg.intercept);
    let mut sigma0 = fit.residuals.transpose() * &fit.residuals / dof as f64;
    symmetrize(&mut sigma0);
    let mut state_mean = DVector::zeros(n * k);
    for i in 0..n {
        for r in 0..k {
            state_mean[i * k + r] = fit.beta[(r, i)];
        }
    }
    let mut state_cov = sigma0.kronecker(&fit.xtx_inv) * cfg.inflation;
    symmetrize(&mut state_cov);
    Ok(Prior {
        state_mean,
        state_cov,
        sigma0,
    })
}

/// Filtered coefficient and covariance paths, one entry per date.
#[derive(Debug, Clone)]
pub struct TvpPath {
    pub tickers: Vec<String>,
    pub lag_order: usize,
    pub intercept: bool,
    pub dates: Vec<NaiveDate>,
    /// Stacked state (posterior mean) per date.
    pub states: Vec<DVector<f64>>,
    /// Innovation covariance S_t per date.
    pub resid_covs: Vec<DMatrix<f64>>,
    /// Posterior state covariance per date.
    pub state_covs: Vec<DMatrix<f64>>,
    /// Most negative eigenvalue seen before a PSD repair, per date (0 when none was needed).
    pub min_eig_before_repair: Vec<f64>,
    /// Steps where the state covariance needed eigenvalue clipping.
    pub repairs: usize,
    /// Whether entry 0 is the prior itself (dated at the last prior-window row).
    pub starts_with_prior: bool,
}

/// A reduced-form VAR read off a path at one date.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub date: NaiveDate,
    pub model: VarModel,
}

impl TvpPath {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_vars(&self) -> usize {
        self.tickers.len()
    }

    fn n_regressors(&self) -> usize {
        self.n_vars() * self.lag_order + usize::from(self.intercept)
    }

    pub fn snapshot(&self, t: usize) -> Result<Snapshot> {
        if t >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "snapshot index {t} out of range for a path of length {}",
                self.len()
            )));
        }
        let (n, k) = (self.n_vars(), self.n_regressors());
        let beta = DMatrix::from_fn(k, n, |r, i| self.states[t][i * k + r]);
        let (intercept, coefficients) = unstack(&beta, n, self.lag_order, self.intercept);
        Ok(Snapshot {
            date: self.dates[t],
            model: VarModel {
                tickers: self.tickers.clone(),
                coefficients,
                intercept,
                sigma: self.resid_covs[t].clone(),
            },
        })
    }

    fn state_labels(&self) -> Vec<String> {
        let mut regs = Vec::new();
        if self.intercept {
            regs.push("const".to_string());
        }
        for l in 1..=self.lag_order {
            for t in &self.tickers {
                regs.push(format!("{t}.l{l}"));
            }
        }
        let mut out = Vec::new();
        for eq in &self.tickers {
            for r in &regs {
                out.push(format!("b:{eq}:{r}"));
            }
        }
        out
    }

    /// One row per date: flattened state, then the lower triangle of S_t (row-major), 12 significant digits.
    /// `header` lines are written first, each prefixed with `# `.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &[String]) -> std::io::Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        let mut cols = vec!["date".to_string()];
        cols.extend(self.state_labels());
        for i in 0..self.n_vars() {
            for j in 0..=i {
                cols.push(format!("S:{}:{}", self.tickers[i], self.tickers[j]));
            }
        }
        w.write_record(&cols)?;
        for t in 0..self.len() {
            let mut rec = vec![self.dates[t].to_string()];
            rec.extend(self.states[t].iter().map(|v| g12(*v)));
            let s = &self.resid_covs[t];
            for i in 0..self.n_vars() {
                for j in 0..=i {
                    rec.push(g12(s[(i, j)]));
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

/// Run the filter over the panel.
pub fn filter(panel: &ReturnPanel, cfg: &TvpConfig) -> Result<TvpPath> {
    let prior = init_prior(panel, cfg)?;
    filter_from(panel, cfg, &prior)
}

/// Run the filter from an explicit prior (see [`init_prior`]).
pub fn filter_from(panel: &ReturnPanel, cfg: &TvpConfig, prior: &Prior) -> Result<TvpPath> {
    let n = panel.n_vars();
    cfg.validate(n)?;
    let p = cfg.lag_order;
    let k = cfg.n_regressors(n);
    let m = n * k;
    if prior.state_mean.len() != m || prior.state_cov.shape() != (m, m) || prior.sigma0.shape() != (n, n) {
        return Err(Error::InvalidArgument("prior dimensions do not match the panel".into()));
    }
    let (x, y) = var_design(&panel.values, p, cfg.intercept, p);
    let rows = x.nrows();
    if rows < cfg.prior_window {
        return Err(Error::InsufficientData(format!(
            "{rows} regression rows for a {}-row prior window",
            cfg.prior_window
        )));
    }
    // Regression row r corresponds to panel row p + r.
    let first = if cfg.include_prior_window { 0 } else { cfg.prior_window };
    let capacity = rows - first + 1;
    let mut path = TvpPath {
        tickers: panel.tickers.clone(),
        lag_order: p,
        intercept: cfg.intercept,
        dates: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        resid_covs: Vec::with_capacity(capacity),
        state_covs: Vec::with_capacity(capacity),
        min_eig_before_repair: Vec::with_capacity(capacity),
        repairs: 0,
        starts_with_prior: !cfg.include_prior_window,
    };

    let mut beta = prior.state_mean.clone();
    let mut cov = prior.state_cov.clone();
    let mut s = prior.sigma0.clone();
    if !cfg.include_prior_window {
        path.dates.push(panel.dates[p + cfg.prior_window - 1]);
        path.states.push(beta.clone());
        path.resid_covs.push(s.clone());
        path.state_covs.push(cov.clone());
        path.min_eig_before_repair.push(0.0);
    }

    let identity = DMatrix::<f64>::identity(m, m);
    for r in first..rows {
        let xr = x.row(r);
        // Z = I_N ⊗ x_r'
        let mut z = DMatrix::zeros(n, m);
        for i in 0..n {
            for c in 0..k {
                z[(i, i * k + c)] = xr[c];
            }
        }
        let yr = y.row(r).transpose();

        let pred_cov = &cov / cfg.kappa1;
        let innovation = &yr - &z * &beta;
        if innovation.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite prediction error on {}",
                panel.dates[p + r]
            )));
        }
        s = &s * cfg.kappa2 + (&innovation * innovation.transpose()) * (1.0 - cfg.kappa2);
        symmetrize(&mut s);

        let pz = &pred_cov * z.transpose();
        let mut f = &z * &pz + &s;
        symmetrize(&mut f);
        let chol = f.cholesky().ok_or_else(|| {
            Error::Numerical(format!(
                "innovation variance is not positive definite on {}",
                panel.dates[p + r]
            ))
        })?;
        // K = P Z' F⁻¹
        let gain = chol.solve(&pz.transpose()).transpose();
        beta += &gain * &innovation;

        let ikz = &identity - &gain * &z;
        let mut next = &ikz * &pred_cov * ikz.transpose() + &gain * &s * gain.transpose();
        symmetrize(&mut next);
        let mut worst = 0.0;
        if next.clone().cholesky().is_none() {
            let scale = next.diagonal().amax().max(f64::MIN_POSITIVE);
            worst = min_eigenvalue(&next);
            if worst < -PSD_REPAIR_TOL * scale {
                return Err(Error::Numerical(format!(
                    "state covariance lost positive semi-definiteness on {} (min eigenvalue {worst:e})",
                    panel.dates[p + r]
                )));
            }
            if worst < 0.0 {
                next = clip_to_psd(&next);
                path.repairs += 1;
            }
        }
        cov = next;

        path.dates.push(panel.dates[p + r]);
        path.states.push(beta.clone());
        path.resid_covs.push(s.clone());
        path.state_covs.push(cov.clone());
        path.min_eig_before_repair.push(worst.min(0.0));
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{simulate_regimes, simulate_var, VarProcess};
    use crate::var::fit_var;

    fn ar_process(phi: f64) -> VarProcess {
        VarProcess {
            tickers: vec!["A".into(), "B".into()],
            intercept: DVector::from_vec(vec![0.01, -0.02]),
            coefficients: vec![DMatrix::from_row_slice(2, 2, &[phi, 0.1, 0.05, 0.3])],
            sigma: DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.8]),
        }
    }

    #[test]
    fn prior_matches_truth_on_constant_dgp() {
        let panel = simulate_var(&ar_process(0.4), 600, 100, 21).unwrap();
        let cfg = TvpConfig {
            prior_window: 500,
            ..TvpConfig::default()
        };
        let prior = init_prior(&panel, &cfg).unwrap();
        // Equation A: [const, A.l1, B.l1]; OLS standard error ≈ 1/sqrt(500) ≈ 0.045, allow ~4 se.
        assert!((prior.state_mean[1] - 0.4).abs() < 0.18);
        assert!((prior.state_mean[2] - 0.1).abs() < 0.18);
        assert!((prior.state_mean[5] - 0.3).abs() < 0.18);
    }

    #[test]
    fn unit_inflation_gives_ols_covariance() {
        let panel = simulate_var(&ar_process(0.4), 400, 100, 2).unwrap();
        let base = TvpConfig::default();
        let one = init_prior(&panel, &TvpConfig { inflation: 1.0, ..base.clone() }).unwrap();
        let four = init_prior(&panel, &base).unwrap();
        // Direct: σ_ij (X'X)^{-1} for the window regression.
        let window = panel.slice_rows(0..1 + base.prior_window);
        let est = fit_var(&window, 1, true).unwrap();
        let (x, _) = var_design(&window.values, 1, true, 1);
        let xtx_inv = (x.transpose() * &x).try_inverse().unwrap();
        let block01 = one.state_cov.view((0, 3), (3, 3)).into_owned();
        assert!((block01 - &xtx_inv * est.model.sigma[(0, 1)]).abs().max() < 1e-12);
        assert!((&one.sigma0 - &est.model.sigma).abs().max() < 1e-14);
        assert!((&four.state_cov - &one.state_cov * 4.0).abs().max() < 1e-14);
    }

    #[test]
    fn config_validation() {
        let panel = simulate_var(&ar_process(0.4), 400, 0, 2).unwrap();
        for cfg in [
            TvpConfig { prior_window: 3, ..TvpConfig::default() },
            TvpConfig { kappa1: 0.0, ..TvpConfig::default() },
            TvpConfig { kappa2: 1.2, ..TvpConfig::default() },
            TvpConfig { inflation: 0.0, ..TvpConfig::default() },
        ] {
            assert!(matches!(init_prior(&panel, &cfg), Err(Error::Config(_))), "{cfg:?}");
        }
        let short = panel.slice_rows(0..150);
        assert!(matches!(init_prior(&short, &TvpConfig::default()), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn path_lengths_in_both_modes() {
        let panel = simulate_var(&ar_process(0.4), 400, 50, 4).unwrap();
        let cfg = TvpConfig::default();
        let path = filter(&panel, &cfg).unwrap();
        assert_eq!(path.len(), 400 - 1 - 200 + 1);
        assert_eq!(path.dates[0], panel.dates[200]);
        assert_eq!(*path.dates.last().unwrap(), *panel.dates.last().unwrap());
        let full = filter(&panel, &TvpConfig { include_prior_window: true, ..cfg }).unwrap();
        assert_eq!(full.len(), 400 - 1);
        assert_eq!(full.dates[0], panel.dates[1]);
    }

    #[test]
    fn no_forgetting_keeps_initial_covariance() {
        let panel = simulate_var(&ar_process(0.4), 500, 50, 5).unwrap();
        let cfg = TvpConfig { kappa1: 1.0, kappa2: 1.0, ..TvpConfig::default() };
        let path = filter(&panel, &cfg).unwrap();
        let s0 = &path.resid_covs[0];
        assert!(path.resid_covs.iter().all(|s| s == s0));
    }

    #[test]
    fn no_forgetting_equals_batch_ols() {
        // With kappa1 = kappa2 = 1 and an un-inflated OLS prior the filter is
        // recursive least squares, so its final state is OLS on every row.
        let panel = simulate_var(&ar_process(0.4), 1500, 50, 6).unwrap();
        let cfg = TvpConfig { kappa1: 1.0, kappa2: 1.0, inflation: 1.0, ..TvpConfig::default() };
        let path = filter(&panel, &cfg).unwrap();
        let last = path.snapshot(path.len() - 1).unwrap().model;
        let ols = fit_var(&panel, 1, true).unwrap().model;
        for (a, b) in last.coefficients[0].iter().zip(ols.coefficients[0].iter()) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-3), "{a} vs {b}");
        }
        for (a, b) in last.intercept.iter().zip(ols.intercept.iter()) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn state_covariance_stays_psd_and_symmetric() {
        let panel = simulate_var(&ar_process(0.4), 800, 50, 7).unwrap();
        let path = filter(&panel, &TvpConfig { kappa1: 0.96, ..TvpConfig::default() }).unwrap();
        for (t, c) in path.state_covs.iter().enumerate().step_by(37) {
            assert_eq!(c, &c.transpose());
            assert!(min_eigenvalue(c) >= -1e-12 * c.diagonal().amax(), "date {t}");
        }
        assert!(path.min_eig_before_repair.iter().all(|&v| v >= -PSD_REPAIR_TOL));
        for s in &path.resid_covs {
            assert_eq!(s, &s.transpose());
        }
    }

    #[test]
    fn deterministic_output() {
        let panel = simulate_var(&ar_process(0.4), 500, 50, 8).unwrap();
        let a = filter(&panel, &TvpConfig::default()).unwrap();
        let b = filter(&panel, &TvpConfig::default()).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.resid_covs, b.resid_covs);
    }

    /// Rows after `break_row` until the own-lag coefficient of the first
    /// equation first comes within `tol` of `target`.
    fn first_passage(path: &TvpPath, break_date: NaiveDate, target: f64, tol: f64) -> Option<usize> {
        let start = path.dates.iter().position(|d| *d >= break_date)?;
        (start..path.len()).find_map(|t| {
            let c = path.snapshot(t).unwrap().model.coefficients[0][(0, 0)];
            ((c - target).abs() < tol).then_some(t - start)
        })
    }

    #[test]
    fn tracks_a_coefficient_jump() {
        let t = 4000;
        let cfg = TvpConfig { kappa1: 0.96, ..TvpConfig::default() };
        for seed in 0..5 {
            let panel = simulate_regimes(&[ar_process(0.2), ar_process(0.7)], &[t / 2], t, 100, seed).unwrap();
            let path = filter(&panel, &cfg).unwrap();
            let lag = first_passage(&path, panel.dates[t / 2], 0.7, 0.1).unwrap();
            assert!(lag <= 200, "seed {seed}: {lag} rows to recover");
            // Settled in the new regime rather than passing through: the mean over
            // rows 100..200 after the break sits closer to 0.7 than to 0.2.
            let at = |k: usize| {
                let idx = path.dates.iter().position(|d| *d == panel.dates[t / 2 + k]).unwrap();
                path.snapshot(idx).unwrap().model.coefficients[0][(0, 0)]
            };
            let settled = (100..200).map(at).sum::<f64>() / 100.0;
            assert!(settled > 0.45, "seed {seed}: settled at {settled}");
        }
    }

    #[test]
    fn snapshot_bounds_and_identity() {
        let panel = simulate_var(&ar_process(0.4), 400, 50, 9).unwrap();
        let path = filter(&panel, &TvpConfig::default()).unwrap();
        let snap = path.snapshot(3).unwrap();
        assert_eq!(snap.date, path.dates[3]);
        assert_eq!(snap.model.ma_coefficients(4).matrices[0], DMatrix::identity(2, 2));
        assert!(path.snapshot(path.len()).is_err());
    }

    #[test]
    fn csv_export_layout() {
        let panel = simulate_var(&ar_process(0.4), 260, 50, 10).unwrap();
        let path = filter(&panel, &TvpConfig::default()).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf, &["kappa1 = 0.99".to_string()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# kappa1 = 0.99"));
        let header = lines.next().unwrap();
        assert!(header.starts_with("date,b:A:const,b:A:A.l1,b:A:B.l1,b:B:const"));
        assert!(header.ends_with("S:A:A,S:B:A,S:B:B"));
        assert_eq!(lines.count(), path.len());
    }
}
