use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::mackinnon_pvalue;
use crate::error::{Error, Result};
use crate::linalg::ols_vec;

/// Deterministic terms in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    None,
    #[default]
    Constant,
    ConstantTrend,
}

impl Deterministic {
    fn n_terms(self) -> usize {
        match self {
            Deterministic::None => 0,
            Deterministic::Constant => 1,
            Deterministic::ConstantTrend => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxLag {
    /// floor(12 · (T/100)^¼)
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    /// t-statistic on the lagged level.
    pub statistic: f64,
    pub chosen_lag: usize,
    pub max_lag: usize,
    /// Rows in the final regression.
    pub nobs: usize,
    pub pvalue: f64,
    pub deterministic: Deterministic,
}

pub fn auto_max_lag(len: usize) -> usize {
    (12.0 * (len as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Regression of Δy_t on deterministic terms, y_{t−1} and `lags` lagged differences,
/// using difference indices `start..` (start ≥ lags).
fn design(y: &[f64], lags: usize, start: usize, spec: Deterministic) -> (DMatrix<f64>, DVector<f64>) {
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let rows = dy.len() - start;
    let k = spec.n_terms() + 1 + lags;
    let mut x = DMatrix::zeros(rows, k);
    let mut target = DVector::zeros(rows);
    for (r, t) in (start..dy.len()).enumerate() {
        target[r] = dy[t];
        let mut c = 0;
        if spec != Deterministic::None {
            x[(r, c)] = 1.0;
            c += 1;
        }
        if spec == Deterministic::ConstantTrend {
            x[(r, c)] = (t + 1) as f64;
            c += 1;
        }
        x[(r, c)] = y[t];
        c += 1;
        for j in 1..=lags {
            x[(r, c)] = dy[t - j];
            c += 1;
        }
    }
    (x, target)
}

struct Fit {
    tau: f64,
    aic: f64,
    nobs: usize,
}

fn fit(y: &[f64], lags: usize, start: usize, spec: Deterministic) -> Result<Fit> {
    let (x, target) = design(y, lags, start, spec);
    let (n, k) = x.shape();
    let ols = ols_vec(&x, &target)?;
    let ssr = ols.ssr(0);
    if !(ssr > 0.0) {
        return Err(Error::Degenerate("ADF regression fits exactly".into()));
    }
    let sigma2 = ssr / (n - k) as f64;
    let level = spec.n_terms();
    let se = (sigma2 * ols.xtx_inv[(level, level)]).sqrt();
    let nf = n as f64;
    Ok(Fit {
        tau: ols.beta[(level, 0)] / se,
        aic: nf * (ssr / nf).ln() + 2.0 * k as f64,
        nobs: n,
    })
}

/// Augmented Dickey-Fuller test with AIC lag selection over `0..=max_lag`.
///
/// Candidate lags are compared on a common sample (the first `max_lag`
/// differences dropped), then the chosen lag is refitted on all usable rows.
pub fn adf_test(series: &[f64], max_lag: MaxLag, spec: Deterministic) -> Result<AdfResult> {
    let len = series.len();
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite observation".into()));
    }
    let max_lag = match max_lag {
        MaxLag::Fixed(m) => m,
        MaxLag::Auto => auto_max_lag(len),
    };
    let params = spec.n_terms() + 1 + max_lag;
    if len <= max_lag + 2 || len - 1 - max_lag <= params + 1 {
        return Err(Error::InsufficientData(format!(
            "{len} observations for ADF with max lag {max_lag}"
        )));
    }

    let mut best: Option<(usize, f64)> = None;
    for lag in 0..=max_lag {
        let f = fit(series, lag, max_lag, spec)?;
        if best.is_none_or(|(_, aic)| f.aic < aic) {
            best = Some((lag, f.aic));
        }
    }
    let (chosen_lag, _) = best.expect("at least one candidate");
    let f = fit(series, chosen_lag, chosen_lag, spec)?;
    Ok(AdfResult {
        statistic: f.tau,
        chosen_lag,
        max_lag,
        nobs: f.nobs,
        pvalue: mackinnon_pvalue(f.tau, spec),
        deterministic: spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_walk(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut level = 0.0;
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                level += z;
                level
            })
            .collect()
    }

    #[test]
    fn auto_rule() {
        assert_eq!(auto_max_lag(100), 12);
        assert_eq!(auto_max_lag(2000), 25);
    }

    #[test]
    fn white_noise_rejects_and_walk_does_not() {
        let walk = random_walk(3, 1500);
        let diff: Vec<f64> = walk.windows(2).map(|w| w[1] - w[0]).collect();
        let r = adf_test(&diff, MaxLag::Auto, Deterministic::Constant).unwrap();
        assert!(r.pvalue < 0.01, "{r:?}");
        assert!(r.chosen_lag <= r.max_lag);
        let r = adf_test(&walk, MaxLag::Fixed(4), Deterministic::Constant).unwrap();
        assert!(r.pvalue > 0.01, "{r:?}");
    }

    #[test]
    fn hand_checked_dickey_fuller_without_lags() {
        // lag 0, no constant: τ = Σ y_{t-1} Δy_t / sqrt(s² Σ y_{t-1}²)
        let y = [1.0, 0.5, 0.8, 0.1, 0.3, -0.2, 0.4, 0.0, 0.2, -0.1];
        let r = adf_test(&y, MaxLag::Fixed(0), Deterministic::None).unwrap();
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for t in 1..y.len() {
            sxy += y[t - 1] * (y[t] - y[t - 1]);
            sxx += y[t - 1] * y[t - 1];
        }
        let b = sxy / sxx;
        let ssr: f64 = (1..y.len()).map(|t| (y[t] - y[t - 1] - b * y[t - 1]).powi(2)).sum();
        let tau = b / (ssr / 8.0 / sxx).sqrt();
        assert!((r.statistic - tau).abs() < 1e-10);
        assert_eq!(r.nobs, 9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            adf_test(&[2.0; 100], MaxLag::Auto, Deterministic::Constant),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            adf_test(&[1.0, 2.0, 3.0], MaxLag::Fixed(2), Deterministic::Constant),
            Err(Error::InsufficientData(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn statistic_is_scale_invariant(seed in 0u64..1000, scale in 0.01f64..100.0) {
            let y = random_walk(seed, 200);
            let scaled: Vec<f64> = y.iter().map(|v| v * scale).collect();
            let a = adf_test(&y, MaxLag::Fixed(4), Deterministic::Constant).unwrap();
            let b = adf_test(&scaled, MaxLag::Fixed(4), Deterministic::Constant).unwrap();
            prop_assert_eq!(a.chosen_lag, b.chosen_lag);
            prop_assert!((a.statistic - b.statistic).abs() < 1e-8);
        }
    }
}
