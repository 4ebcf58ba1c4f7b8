//! Generalized forecast-error variance decomposition and the connectedness
//! indices built on it.
//!
//! Shares are kept as fractions in [`FevdTable`]; every index in
//! [`ConnectednessReport`] is in percent except PCI and PII, which are ratios.

mod dynamic;
mod table;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::matrix_rows;
use crate::linalg::min_eigenvalue;
use crate::var::VarModel;

pub use dynamic::{average_tables, dynamic_indices, DynamicConnectedness, MAX_FAILURE_SHARE};
pub use table::{pairwise_csv, report_csv, report_text};

#[derive(Debug, Clone, PartialEq)]
pub struct FevdTable {
    pub tickers: Vec<String>,
    pub horizon: usize,
    /// d_ij before normalization; rows need not sum to one.
    pub raw: DMatrix<f64>,
    /// l_ij = d_ij / Σ_j d_ij.
    pub normalized: DMatrix<f64>,
}

/// Generalized (order-free) H-step decomposition:
/// `d_ij = σ_jj⁻¹ Σ_h (e_i'Ψ_hΣe_j)² / Σ_h e_i'Ψ_hΣΨ_h'e_i` over `h = 0..H−1`.
///
/// The horizon is finite, so explosive coefficient draws are decomposed too.
pub fn gfevd(model: &VarModel, horizon: usize) -> Result<FevdTable> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be positive".into()));
    }
    let n = model.n_vars();
    let sigma = &model.sigma;
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite innovation covariance".into()));
    }
    let scale = sigma.diagonal().amax();
    if let Some(j) = (0..n).find(|&j| !(sigma[(j, j)] > 0.0)) {
        return Err(Error::Degenerate(format!(
            "innovation variance of {} is not positive",
            model.tickers.get(j).map_or("?", String::as_str)
        )));
    }
    if min_eigenvalue(sigma) < -1e-10 * scale {
        return Err(Error::InvalidArgument("innovation covariance is not positive semi-definite".into()));
    }

    let mut num = DMatrix::<f64>::zeros(n, n);
    let mut den = vec![0.0; n];
    for psi in &model.ma_coefficients(horizon).matrices {
        let a = psi * sigma;
        for i in 0..n {
            for j in 0..n {
                num[(i, j)] += a[(i, j)] * a[(i, j)];
                den[i] += a[(i, j)] * psi[(i, j)];
            }
        }
    }
    let mut raw = DMatrix::zeros(n, n);
    for i in 0..n {
        if !(den[i] > 0.0) || !den[i].is_finite() {
            return Err(Error::Degenerate(format!(
                "forecast-error variance of {} is {}",
                model.tickers.get(i).map_or("?", String::as_str),
                den[i]
            )));
        }
        for j in 0..n {
            raw[(i, j)] = num[(i, j)] / sigma[(j, j)] / den[i];
        }
    }
    let normalized = normalize_rows(&raw)?;
    Ok(FevdTable {
        tickers: model.tickers.clone(),
        horizon,
        raw,
        normalized,
    })
}

fn normalize_rows(raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut l = raw.clone();
    for mut row in l.row_iter_mut() {
        let total: f64 = row.sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Numerical(format!("decomposition row sums to {total}")));
        }
        row /= total;
    }
    Ok(l)
}

/// Every connectedness index for one decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectednessReport {
    pub label: String,
    pub tickers: Vec<String>,
    pub horizon: usize,
    /// Normalized shares l (fractions), row i = receiver.
    #[serde(with = "matrix_rows")]
    pub shares: DMatrix<f64>,
    /// Receiver: 100 · Σ_{j≠i} l_ij.
    pub from: Vec<f64>,
    /// Giver: 100 · Σ_{j≠i} l_ji.
    pub to: Vec<f64>,
    /// TO_i + 100 · l_ii.
    pub inc_own: Vec<f64>,
    /// TO_i − FROM_i.
    pub net: Vec<f64>,
    /// Number of partners that i dominates.
    pub npt: Vec<usize>,
    /// Mean of FROM.
    pub tci: f64,
    /// Net transmission from i to j, 100 · (l_ji − l_ij); positive means i dominates j.
    #[serde(with = "matrix_rows")]
    pub npdc: DMatrix<f64>,
    /// (l_ij + l_ji) / (l_ii + l_jj + l_ij + l_ji); zero on the diagonal.
    #[serde(with = "matrix_rows")]
    pub pci: DMatrix<f64>,
    /// (l_ij − l_ji) / (l_ij + l_ji), 0 when both shares vanish; zero on the diagonal.
    #[serde(with = "matrix_rows")]
    pub pii: DMatrix<f64>,
}

impl ConnectednessReport {
    pub fn n_vars(&self) -> usize {
        self.tickers.len()
    }

    pub fn givers(&self) -> Vec<&str> {
        self.tickers
            .iter()
            .zip(&self.net)
            .filter(|(_, n)| **n > 0.0)
            .map(|(t, _)| t.as_str())
            .collect()
    }

    pub fn receivers(&self) -> Vec<&str> {
        self.tickers
            .iter()
            .zip(&self.net)
            .filter(|(_, n)| **n <= 0.0)
            .map(|(t, _)| t.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: ConnectednessReport =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("connectedness report: {e}")))?;
        let n = report.tickers.len();
        let ok = |m: &DMatrix<f64>| m.shape() == (n, n);
        if !ok(&report.shares) || !ok(&report.npdc) || !ok(&report.pci) || !ok(&report.pii) || report.net.len() != n {
            return Err(Error::Parse("connectedness report dimensions disagree".into()));
        }
        Ok(report)
    }
}

pub fn indices(fevd: &FevdTable, label: impl Into<String>) -> ConnectednessReport {
    let l = &fevd.normalized;
    let n = l.nrows();
    let own = |i: usize| l[(i, i)];
    let from: Vec<f64> = (0..n)
        .map(|i| 100.0 * (0..n).filter(|&j| j != i).map(|j| l[(i, j)]).sum::<f64>())
        .collect();
    let to: Vec<f64> = (0..n)
        .map(|i| 100.0 * (0..n).filter(|&j| j != i).map(|j| l[(j, i)]).sum::<f64>())
        .collect();
    let inc_own = (0..n).map(|i| to[i] + 100.0 * own(i)).collect();
    let net = (0..n).map(|i| to[i] - from[i]).collect();
    let tci = from.iter().sum::<f64>() / n as f64;

    let npdc = DMatrix::from_fn(n, n, |i, j| 100.0 * (l[(j, i)] - l[(i, j)]));
    let npt = (0..n).map(|i| (0..n).filter(|&j| npdc[(i, j)] > 0.0).count()).collect();
    let pci = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return 0.0;
        }
        let cross = l[(i, j)] + l[(j, i)];
        cross / (own(i) + own(j) + cross)
    });
    let pii = DMatrix::from_fn(n, n, |i, j| {
        let cross = l[(i, j)] + l[(j, i)];
        if i == j || cross == 0.0 {
            0.0
        } else {
            (l[(i, j)] - l[(j, i)]) / cross
        }
    });
    ConnectednessReport {
        label: label.into(),
        tickers: fevd.tickers.clone(),
        horizon: fevd.horizon,
        shares: l.clone(),
        from,
        to,
        inc_own,
        net,
        npt,
        tci,
        npdc,
        pci,
        pii,
    }
}

/// Decompose and index a model in one step.
pub fn connectedness(model: &VarModel, horizon: usize, label: impl Into<String>) -> Result<ConnectednessReport> {
    Ok(indices(&gfevd(model, horizon)?, label))
}
