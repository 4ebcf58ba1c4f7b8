use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::mean;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjungBox {
    pub stat: f64,
    pub lags: usize,
    pub pvalue: f64,
}

/// Ljung-Box portmanteau statistic with χ²(lags) p-value.
///
/// With `on_squares` the test runs on (x − x̄)², the usual check for
/// volatility clustering.
pub fn ljung_box(series: &[f64], lags: usize, on_squares: bool) -> Result<LjungBox> {
    let n = series.len();
    if lags == 0 {
        return Err(Error::InvalidArgument("lags must be positive".into()));
    }
    if n <= lags + 1 {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {lags} lags"
        )));
    }
    let y: Vec<f64> = if on_squares {
        let mu = mean(series);
        series.iter().map(|v| (v - mu) * (v - mu)).collect()
    } else {
        series.to_vec()
    };
    let mu = mean(&y);
    let dev: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if denom <= 0.0 {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    let nf = n as f64;
    let mut acc = 0.0;
    for k in 1..=lags {
        let num: f64 = dev[k..].iter().zip(&dev[..n - k]).map(|(a, b)| a * b).sum();
        let rho = num / denom;
        acc += rho * rho / (nf - k as f64);
    }
    let stat = nf * (nf + 2.0) * acc;
    let pvalue = ChiSquared::new(lags as f64).expect("positive df").sf(stat);
    Ok(LjungBox { stat, lags, pvalue })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn impulse_gives_finite_statistic() {
        let mut x = vec![0.0; 50];
        x[0] = 1.0;
        let lb = ljung_box(&x, 10, false).unwrap();
        assert!(lb.stat.is_finite() && lb.stat >= 0.0);
        assert!((0.0..=1.0).contains(&lb.pvalue));
    }

    #[test]
    fn hand_computed_lag_one() {
        // x = [1, 2, 3, 4]: dev = [-1.5, -0.5, 0.5, 1.5], denom 5, lag-1 sum = 0.75 - 0.25 + 0.75 = 1.25
        let lb = ljung_box(&[1.0, 2.0, 3.0, 4.0], 1, false).unwrap();
        let rho = 1.25 / 5.0;
        assert!((lb.stat - 4.0 * 6.0 * rho * rho / 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_short_is_rejected() {
        assert!(matches!(ljung_box(&[1.0, 2.0, 3.0], 2, false), Err(Error::InsufficientData(_))));
        assert!(matches!(ljung_box(&[1.0; 10], 2, false), Err(Error::Degenerate(_))));
    }

    #[test]
    fn arch_effects_detected_in_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut x = Vec::with_capacity(5000);
        let mut prev: f64 = 0.0;
        for _ in 0..5000 {
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = (1.0 + 0.5 * prev * prev).sqrt() * z;
            x.push(v);
            prev = v;
        }
        assert!(ljung_box(&x, 20, true).unwrap().pvalue < 0.01);
    }

    proptest! {
        #[test]
        fn statistic_nonnegative_and_monotone_in_lags(x in proptest::collection::vec(-3.0f64..3.0, 40..100)) {
            let mut prev = 0.0;
            for lags in 1..15 {
                let lb = match ljung_box(&x, lags, false) { Ok(v) => v, Err(_) => return Ok(()) };
                prop_assert!(lb.stat >= 0.0);
                prop_assert!(lb.stat >= prev);
                prev = lb.stat;
            }
        }
    }
}
