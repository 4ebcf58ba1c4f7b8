//! Constant-coefficient VAR(p): equation-by-equation OLS, BIC lag choice,
//! stability and the moving-average (Wold) expansion.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::data::ReturnPanel;
use crate::error::{Error, Result};
use crate::format::g17;
use crate::linalg::{ols, spectral_radius, symmetrize};

/// Coefficients and innovation covariance of a VAR, however they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    pub tickers: Vec<String>,
    /// Φ_1..Φ_p; entry (i, j) of Φ_l loads x_{j,t−l} into equation i.
    pub coefficients: Vec<DMatrix<f64>>,
    pub intercept: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

/// Ψ_0..Ψ_{H−1} with Ψ_0 = I.
#[derive(Debug, Clone, PartialEq)]
pub struct MaCoefficients {
    pub matrices: Vec<DMatrix<f64>>,
}

impl MaCoefficients {
    pub fn horizons(&self) -> usize {
        self.matrices.len()
    }
}

impl VarModel {
    pub fn n_vars(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn lag_order(&self) -> usize {
        self.coefficients.len()
    }

    /// Np × Np companion matrix of the lag polynomial.
    pub fn companion(&self) -> DMatrix<f64> {
        let (n, p) = (self.n_vars(), self.lag_order());
        let mut c = DMatrix::zeros(n * p, n * p);
        for (l, phi) in self.coefficients.iter().enumerate() {
            c.view_mut((0, l * n), (n, n)).copy_from(phi);
        }
        for b in 1..p {
            c.view_mut((b * n, (b - 1) * n), (n, n))
                .copy_from(&DMatrix::identity(n, n));
        }
        c
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.companion())
    }

    pub fn ma_coefficients(&self, horizons: usize) -> MaCoefficients {
        let n = self.n_vars();
        let p = self.lag_order();
        let mut psi: Vec<DMatrix<f64>> = Vec::with_capacity(horizons);
        if horizons > 0 {
            psi.push(DMatrix::identity(n, n));
        }
        for h in 1..horizons {
            let mut acc = DMatrix::zeros(n, n);
            for j in 1..=h.min(p) {
                acc += &self.coefficients[j - 1] * &psi[h - j];
            }
            psi.push(acc);
        }
        MaCoefficients { matrices: psi }
    }

    /// Same system with variables reordered; `order[k]` is the old index of new variable k.
    pub fn permuted(&self, order: &[usize]) -> VarModel {
        let pm = |m: &DMatrix<f64>| DMatrix::from_fn(order.len(), order.len(), |i, j| m[(order[i], order[j])]);
        VarModel {
            tickers: order.iter().map(|&k| self.tickers[k].clone()).collect(),
            coefficients: self.coefficients.iter().map(pm).collect(),
            intercept: DVector::from_fn(order.len(), |i, _| self.intercept[order[i]]),
            sigma: pm(&self.sigma),
        }
    }
}

/// Fitted static VAR.
#[derive(Debug, Clone)]
pub struct VarEstimate {
    pub model: VarModel,
    pub include_intercept: bool,
    /// (T − p) × N, or fewer rows when fitted on a trimmed common sample.
    pub residuals: DMatrix<f64>,
    pub nobs: usize,
    pub bic: f64,
    pub spectral_radius: f64,
    pub stable: bool,
    /// `Some(p_max)` when the lag order came from BIC selection.
    pub selected_from: Option<usize>,
}

impl VarEstimate {
    pub fn lag_order(&self) -> usize {
        self.model.lag_order()
    }

    pub fn ma_coefficients(&self, horizons: usize) -> MaCoefficients {
        self.model.ma_coefficients(horizons)
    }
}

/// Design and response for rows `start..T` of a VAR(p): `[1, x_{t−1}', …, x_{t−p}']`.
pub(crate) fn var_design(
    values: &DMatrix<f64>,
    p: usize,
    intercept: bool,
    start: usize,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (t, n) = values.shape();
    let rows = t - start;
    let k = n * p + usize::from(intercept);
    let off = usize::from(intercept);
    let mut x = DMatrix::zeros(rows, k);
    for (r, tt) in (start..t).enumerate() {
        if intercept {
            x[(r, 0)] = 1.0;
        }
        for l in 1..=p {
            for j in 0..n {
                x[(r, off + (l - 1) * n + j)] = values[(tt - l, j)];
            }
        }
    }
    let y = values.rows(start, rows).into_owned();
    (x, y)
}

/// Split a k × N OLS coefficient block (one column per equation) into intercept and Φ_l.
pub(crate) fn unstack(beta: &DMatrix<f64>, n: usize, p: usize, intercept: bool) -> (DVector<f64>, Vec<DMatrix<f64>>) {
    let off = usize::from(intercept);
    let c = if intercept {
        DVector::from_fn(n, |i, _| beta[(0, i)])
    } else {
        DVector::zeros(n)
    };
    let phis = (0..p)
        .map(|l| DMatrix::from_fn(n, n, |i, j| beta[(off + l * n + j, i)]))
        .collect();
    (c, phis)
}

fn gaussian_bic(residuals: &DMatrix<f64>, n_params: usize) -> Result<f64> {
    let (rows, n) = residuals.shape();
    let nf = rows as f64;
    let sigma_ml = residuals.transpose() * residuals / nf;
    let det = sigma_ml.determinant();
    if !(det > 0.0) {
        return Err(Error::Singular("residual covariance is singular".into()));
    }
    let llf = -0.5 * nf * (n as f64 * (2.0 * std::f64::consts::PI).ln() + det.ln() + n as f64);
    Ok(-2.0 * llf + n_params as f64 * nf.ln())
}

fn fit_from(panel: &ReturnPanel, p: usize, intercept: bool, start: usize) -> Result<VarEstimate> {
    let (t, n) = panel.values.shape();
    if p == 0 {
        return Err(Error::InvalidArgument("lag order must be positive".into()));
    }
    if t <= start || t - start <= n * p + 1 {
        return Err(Error::InsufficientData(format!(
            "{} usable rows for a {n}-variable VAR({p})",
            t.saturating_sub(start)
        )));
    }
    let (x, y) = var_design(&panel.values, p, intercept, start);
    let fit = ols(&x, &y)?;
    let rows = fit.nobs();
    let k = x.ncols();
    let dof = rows - n * p - usize::from(intercept);
    let mut sigma = fit.residuals.transpose() * &fit.residuals / dof as f64;
    symmetrize(&mut sigma);
    let bic = gaussian_bic(&fit.residuals, n * k)?;
    let (c, phis) = unstack(&fit.beta, n, p, intercept);
    let model = VarModel {
        tickers: panel.tickers.clone(),
        coefficients: phis,
        intercept: c,
        sigma,
    };
    let radius = model.spectral_radius();
    Ok(VarEstimate {
        model,
        include_intercept: intercept,
        residuals: fit.residuals,
        nobs: rows,
        bic,
        spectral_radius: radius,
        stable: radius < 1.0,
        selected_from: None,
    })
}

/// OLS fit of a VAR(p) on all rows `p..T`.
pub fn fit_var(panel: &ReturnPanel, p: usize, intercept: bool) -> Result<VarEstimate> {
    fit_from(panel, p, intercept, p)
}

/// BIC for p = 1..=p_max, all fitted on rows `p_max..T`.
pub fn lag_criteria(panel: &ReturnPanel, p_max: usize, intercept: bool) -> Result<Vec<f64>> {
    if p_max == 0 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    (1..=p_max)
        .map(|p| fit_from(panel, p, intercept, p_max).map(|e| e.bic))
        .collect()
}

/// Lag order minimising BIC over 1..=p_max on a common sample.
pub fn select_lag(panel: &ReturnPanel, p_max: usize, intercept: bool) -> Result<usize> {
    let bic = lag_criteria(panel, p_max, intercept)?;
    Ok(bic
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i + 1)
        .expect("p_max ≥ 1"))
}

impl VarEstimate {
    /// Self-describing text snapshot; every number at 17 significant digits.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut s = String::new();
        let _ = writeln!(s, "# spillover VAR estimate");
        let _ = writeln!(s, "format 1");
        let _ = writeln!(s, "tickers {}", m.tickers.join(" "));
        let _ = writeln!(s, "lag_order {}", m.lag_order());
        match self.selected_from {
            Some(p_max) => {
                let _ = writeln!(s, "lag_selection bic p_max={p_max}");
            }
            None => {
                let _ = writeln!(s, "lag_selection fixed");
            }
        }
        let _ = writeln!(s, "intercept {}", self.include_intercept);
        let _ = writeln!(s, "nobs {}", self.nobs);
        let _ = writeln!(s, "bic {}", g17(self.bic));
        let _ = writeln!(s, "spectral_radius {}", g17(self.spectral_radius));
        let _ = writeln!(s, "stable {}", self.stable);
        let _ = writeln!(s, "[intercept]");
        let _ = writeln!(s, "{}", join_row(m.intercept.iter()));
        for (l, phi) in m.coefficients.iter().enumerate() {
            let _ = writeln!(s, "[phi {}]", l + 1);
            write_matrix(&mut s, phi);
        }
        let _ = writeln!(s, "[sigma]");
        write_matrix(&mut s, &m.sigma);
        s
    }
}

fn join_row<'a>(it: impl Iterator<Item = &'a f64>) -> String {
    it.map(|v| g17(*v)).collect::<Vec<_>>().join(" ")
}

fn write_matrix(s: &mut String, m: &DMatrix<f64>) {
    for r in 0..m.nrows() {
        let _ = writeln!(s, "{}", join_row(m.row(r).iter()));
    }
}

/// Header fields and model read back from [`VarEstimate::to_text`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSnapshot {
    pub model: VarModel,
    pub include_intercept: bool,
    pub nobs: usize,
    pub bic: f64,
    pub spectral_radius: f64,
    pub stable: bool,
    pub lag_selection: String,
}

impl EstimateSnapshot {
    pub fn parse(text: &str) -> Result<Self> {
        let perr = |m: &str| Error::Parse(format!("VAR snapshot: {m}"));
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let mut header = std::collections::BTreeMap::new();
        let mut first_block = None;
        for line in lines.by_ref() {
            if line.starts_with('[') {
                first_block = Some(line);
                break;
            }
            let (k, v) = line.split_once(' ').unwrap_or((line, ""));
            header.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| header.get(k).ok_or_else(|| perr(&format!("missing `{k}`")));
        if get("format")? != "1" {
            return Err(perr("unsupported format version"));
        }
        let tickers: Vec<String> = get("tickers")?.split_whitespace().map(String::from).collect();
        let n = tickers.len();
        let p: usize = get("lag_order")?.parse().map_err(|_| perr("bad lag_order"))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| perr(&format!("bad number `{s}`")));
        let row = |line: Option<&str>| -> Result<Vec<f64>> {
            let vals = line
                .ok_or_else(|| perr("truncated"))?
                .split_whitespace()
                .map(num)
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != n {
                return Err(perr("row length does not match ticker count"));
            }
            Ok(vals)
        };
        let expect_block = |name: &str, line: Option<&str>| -> Result<()> {
            if line != Some(name) {
                return Err(perr(&format!("expected {name}")));
            }
            Ok(())
        };
        expect_block("[intercept]", first_block)?;
        let intercept = DVector::from_vec(row(lines.next())?);
        let read_matrix = |lines: &mut dyn Iterator<Item = &str>| -> Result<DMatrix<f64>> {
            let mut data = Vec::with_capacity(n * n);
            for _ in 0..n {
                data.extend(row(lines.next())?);
            }
            Ok(DMatrix::from_row_slice(n, n, &data))
        };
        let mut coefficients = Vec::with_capacity(p);
        for l in 1..=p {
            expect_block(&format!("[phi {l}]"), lines.next())?;
            coefficients.push(read_matrix(&mut lines)?);
        }
        expect_block("[sigma]", lines.next())?;
        let sigma = read_matrix(&mut lines)?;
        let flag = |k: &str| -> Result<bool> { get(k)?.parse().map_err(|_| perr(&format!("bad `{k}`"))) };
        Ok(EstimateSnapshot {
            model: VarModel {
                tickers,
                coefficients,
                intercept,
                sigma,
            },
            include_intercept: flag("intercept")?,
            nobs: get("nobs")?.parse().map_err(|_| perr("bad nobs"))?,
            bic: num(get("bic")?)?,
            spectral_radius: num(get("spectral_radius")?)?,
            stable: flag("stable")?,
            lag_selection: get("lag_selection")?.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{simulate_var, VarProcess};

    fn process(phis: Vec<DMatrix<f64>>, sigma: DMatrix<f64>) -> VarProcess {
        let n = sigma.nrows();
        VarProcess {
            tickers: (0..n).map(|i| format!("V{i}")).collect(),
            intercept: DVector::zeros(n),
            coefficients: phis,
            sigma,
        }
    }

    #[test]
    fn recovers_bivariate_var1() {
        let truth = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3]);
        let panel = simulate_var(&process(vec![truth.clone()], DMatrix::identity(2, 2)), 20_000, 500, 42).unwrap();
        let est = fit_var(&panel, 1, true).unwrap();
        let err = (&est.model.coefficients[0] - &truth).abs().max();
        assert!(err < 0.03, "max coefficient error {err}");
        assert!(est.stable);
        assert!((est.spectral_radius - 0.5).abs() < 0.03);
        assert!((&est.model.sigma - DMatrix::identity(2, 2)).abs().max() < 0.05);
    }

    #[test]
    fn white_noise_coefficients_are_small() {
        let p = process(vec![DMatrix::zeros(3, 3)], DMatrix::identity(3, 3));
        let panel = simulate_var(&p, 20_000, 0, 9).unwrap();
        let est = fit_var(&panel, 1, true).unwrap();
        assert!(est.model.coefficients[0].abs().max() < 0.03);
    }

    #[test]
    fn too_many_lags_for_sample() {
        let p = process(vec![DMatrix::zeros(2, 2)], DMatrix::identity(2, 2));
        let panel = simulate_var(&p, 10, 0, 1).unwrap();
        // T − p = 7 ≤ N·p + 1 = 7
        assert!(matches!(fit_var(&panel, 3, true), Err(Error::InsufficientData(_))));
        assert!(fit_var(&panel, 2, true).is_ok());
    }

    #[test]
    fn collinear_columns_are_singular() {
        let p = process(vec![DMatrix::zeros(1, 1)], DMatrix::identity(1, 1));
        let one = simulate_var(&p, 200, 0, 3).unwrap();
        let dup = ReturnPanel::new(
            vec!["A".into(), "B".into()],
            one.dates.clone(),
            DMatrix::from_fn(200, 2, |r, _| one.values[(r, 0)]),
        )
        .unwrap();
        assert!(matches!(fit_var(&dup, 1, true), Err(Error::Singular(_))));
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let truth = DMatrix::from_row_slice(2, 2, &[0.4, 0.2, -0.1, 0.3]);
        let panel = simulate_var(&process(vec![truth], DMatrix::identity(2, 2)), 3000, 100, 5).unwrap();
        let est = fit_var(&panel, 2, true).unwrap();
        let (x, _) = var_design(&panel.values, 2, true, 2);
        let inner = x.transpose() * &est.residuals;
        assert!(inner.abs().max() / (est.nobs as f64) < 1e-8);
    }

    #[test]
    fn lag_selection_singleton_and_white_noise() {
        let p = process(vec![DMatrix::zeros(2, 2)], DMatrix::identity(2, 2));
        let panel = simulate_var(&p, 5000, 0, 77).unwrap();
        assert_eq!(select_lag(&panel, 1, true).unwrap(), 1);
        assert_eq!(select_lag(&panel, 4, true).unwrap(), 1);
    }

    #[test]
    fn var2_is_selected() {
        let phi1 = DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.0, 0.2]);
        let phi2 = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.1, -0.35]);
        let proc2 = process(vec![phi1, phi2], DMatrix::identity(2, 2));
        let hits = (0..50)
            .filter(|&seed| {
                let panel = simulate_var(&proc2, 20_000, 200, 100 + seed).unwrap();
                select_lag(&panel, 4, true).unwrap() == 2
            })
            .count();
        assert!(hits >= 48, "VAR(2) chosen {hits}/50 times");
    }

    #[test]
    fn ma_identity_and_powers() {
        let phi = DMatrix::identity(2, 2) * 0.5;
        let model = process(vec![phi], DMatrix::identity(2, 2)).model();
        let ma = model.ma_coefficients(3);
        assert_eq!(ma.matrices[0], DMatrix::identity(2, 2));
        assert_eq!(ma.matrices[1], DMatrix::identity(2, 2) * 0.5);
        assert_eq!(ma.matrices[2], DMatrix::identity(2, 2) * 0.25);
    }

    #[test]
    fn ma_matches_unit_shock_propagation() {
        // Oracle: push e_j through the recursion with noise switched off.
        let phi1 = DMatrix::from_row_slice(3, 3, &[0.3, 0.1, -0.2, 0.05, 0.4, 0.1, 0.0, -0.15, 0.2]);
        let phi2 = DMatrix::from_row_slice(3, 3, &[0.1, 0.0, 0.05, -0.1, 0.1, 0.0, 0.05, 0.05, -0.1]);
        let model = VarModel {
            tickers: vec!["a".into(), "b".into(), "c".into()],
            coefficients: vec![phi1.clone(), phi2.clone()],
            intercept: DVector::zeros(3),
            sigma: DMatrix::identity(3, 3),
        };
        assert!(model.spectral_radius() < 1.0);
        let h = 15;
        let ma = model.ma_coefficients(h);
        for j in 0..3 {
            let mut path: Vec<DVector<f64>> = Vec::new();
            for step in 0..h {
                let mut y = if step == 0 {
                    DVector::from_fn(3, |i, _| if i == j { 1.0 } else { 0.0 })
                } else {
                    DVector::zeros(3)
                };
                if step >= 1 {
                    y += &phi1 * &path[step - 1];
                }
                if step >= 2 {
                    y += &phi2 * &path[step - 2];
                }
                path.push(y);
            }
            for (step, y) in path.iter().enumerate() {
                let col = ma.matrices[step].column(j);
                assert!((col - y).abs().max() < 1e-10);
            }
        }
        assert!(ma.matrices[h - 1].norm() < ma.matrices[1].norm());
    }

    #[test]
    fn permuted_panel_conjugates_estimate() {
        let truth = DMatrix::from_row_slice(3, 3, &[0.4, 0.1, 0.0, 0.0, 0.3, 0.2, 0.1, 0.0, 0.2]);
        let sigma = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.0]);
        let panel = simulate_var(&process(vec![truth], sigma), 2000, 100, 8).unwrap();
        let order = [2, 0, 1];
        let a = fit_var(&panel, 1, true).unwrap().model.permuted(&order);
        let b = fit_var(&panel.select_columns(&order), 1, true).unwrap().model;
        assert_eq!(a.tickers, b.tickers);
        assert!((&a.coefficients[0] - &b.coefficients[0]).abs().max() < 1e-12);
        assert!((&a.sigma - &b.sigma).abs().max() < 1e-12);
        assert!((&a.intercept - &b.intercept).abs().max() < 1e-12);
    }

    #[test]
    fn snapshot_round_trip() {
        let truth = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.0, 0.3]);
        let panel = simulate_var(&process(vec![truth], DMatrix::identity(2, 2)), 500, 50, 2).unwrap();
        let mut est = fit_var(&panel, 2, true).unwrap();
        est.selected_from = Some(5);
        let text = est.to_text();
        assert!(text.contains("lag_selection bic p_max=5"));
        let snap = EstimateSnapshot::parse(&text).unwrap();
        assert_eq!(snap.model, est.model);
        assert_eq!(snap.bic, est.bic);
        assert_eq!(snap.nobs, est.nobs);
        assert!(EstimateSnapshot::parse(&text.replace("[sigma]", "[sigmo]")).is_err());
    }
}
