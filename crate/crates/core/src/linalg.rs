//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold on the diagonal of R below which a design is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Least-squares fit of one or more responses on a common design matrix.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// k × m coefficients, one column per response.
    pub beta: DMatrix<f64>,
    /// n × m residuals.
    pub residuals: DMatrix<f64>,
    /// (X'X)^{-1}, k × k.
    pub xtx_inv: DMatrix<f64>,
}

impl OlsFit {
    pub fn nobs(&self) -> usize {
        self.residuals.nrows()
    }

    /// Residual sum of squares of response `col`.
    pub fn ssr(&self, col: usize) -> f64 {
        self.residuals.column(col).norm_squared()
    }
}

/// Householder-QR least squares, rejecting rank-deficient designs.
pub fn ols(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.nrows() != n {
        return Err(Error::InvalidArgument(format!(
            "design has {n} rows but response has {}",
            y.nrows()
        )));
    }
    if n <= k {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {k} regressors"
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite value in regression data".into()));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if max_diag == 0.0 || (0..k).any(|i| r[(i, i)].abs() <= RANK_TOL * max_diag) {
        return Err(Error::Singular(format!(
            "design matrix ({n} × {k}) is rank deficient"
        )));
    }
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::Singular("triangular inverse failed".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let residuals = y - x * &beta;
    Ok(OlsFit {
        beta,
        residuals,
        xtx_inv,
    })
}

/// Single-response convenience wrapper around [`ols`].
pub fn ols_vec(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let y = DMatrix::from_column_slice(y.len(), 1, y.as_slice());
    ols(x, &y)
}

/// Replace `m` by (m + m')/2 in place.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Bring a symmetric matrix back onto the PSD cone by clipping negative eigenvalues.
pub fn clip_to_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let vals = eig.eigenvalues.map(|v| v.max(0.0));
    let mut out = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
    symmetrize(&mut out);
    out
}

/// Largest modulus among the eigenvalues of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
