//! Seeded synthetic VAR data: the test oracles' data generator and the
//! source of the bundled fixtures.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{RawSeries, ReturnPanel};
use crate::error::{Error, Result};
use crate::var::VarModel;

/// Data-generating VAR: x_t = c + Σ Φ_l x_{t−l} + u_t, u_t ~ N(0, Σ).
#[derive(Debug, Clone, PartialEq)]
pub struct VarProcess {
    pub tickers: Vec<String>,
    pub intercept: DVector<f64>,
    pub coefficients: Vec<DMatrix<f64>>,
    pub sigma: DMatrix<f64>,
}

impl VarProcess {
    pub fn n_vars(&self) -> usize {
        self.sigma.nrows()
    }

    /// The process as a [`VarModel`], i.e. the population parameters.
    pub fn model(&self) -> VarModel {
        VarModel {
            tickers: self.tickers.clone(),
            coefficients: self.coefficients.clone(),
            intercept: self.intercept.clone(),
            sigma: self.sigma.clone(),
        }
    }

    fn shock_factor(&self) -> Result<DMatrix<f64>> {
        self.sigma
            .clone()
            .cholesky()
            .map(|c| c.l())
            .ok_or_else(|| Error::InvalidArgument("innovation covariance is not positive definite".into()))
    }
}

/// Consecutive calendar days starting 2000-01-01.
pub fn synthetic_dates(n: usize) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    (0..n).map(|k| start + Days::new(k as u64)).collect()
}

/// Draw `t` observations after discarding `burn_in`.
pub fn simulate_var(process: &VarProcess, t: usize, burn_in: usize, seed: u64) -> Result<ReturnPanel> {
    simulate_regimes(std::slice::from_ref(process), &[], t, burn_in, seed)
}

/// Piecewise-constant DGP: `regimes[k]` generates rows from `switch_at[k−1]` (kept-sample index).
pub fn simulate_regimes(
    regimes: &[VarProcess],
    switch_at: &[usize],
    t: usize,
    burn_in: usize,
    seed: u64,
) -> Result<ReturnPanel> {
    let first = regimes
        .first()
        .ok_or_else(|| Error::InvalidArgument("no regimes".into()))?;
    if switch_at.len() + 1 != regimes.len() {
        return Err(Error::InvalidArgument("need one switch point per extra regime".into()));
    }
    let n = first.n_vars();
    let factors = regimes
        .iter()
        .map(VarProcess::shock_factor)
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = burn_in + t;
    let mut hist: Vec<DVector<f64>> = Vec::with_capacity(total);
    for step in 0..total {
        let kept = step.checked_sub(burn_in);
        let regime = kept.map_or(0, |k| switch_at.iter().filter(|&&s| k >= s).count());
        let proc_ = &regimes[regime];
        let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let mut x = &proc_.intercept + &factors[regime] * z;
        for (l, phi) in proc_.coefficients.iter().enumerate() {
            if step > l {
                x += phi * &hist[step - l - 1];
            }
        }
        hist.push(x);
    }
    let values = DMatrix::from_fn(t, n, |r, c| hist[burn_in + r][c]);
    ReturnPanel::new(first.tickers.clone(), synthetic_dates(t), values)
}

/// A bundled input dataset: price series on their native calendars.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub process: VarProcess,
    pub series: Vec<RawSeries>,
    /// Tickers traded every calendar day; the rest trade Monday to Friday.
    pub seven_day: Vec<String>,
}

fn is_weekday(d: NaiveDate) -> bool {
    !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Turn simulated log returns into price levels on mixed calendars.
///
/// Returns land on weekdays starting from `start`. Seven-day tickers also get
/// weekend prices; the next weekday price is still pinned to the simulated
/// Friday-to-Monday return, so aligning on common dates recovers the panel.
pub fn prices_from_returns(
    process: VarProcess,
    returns: &ReturnPanel,
    seven_day: &[String],
    start: NaiveDate,
    seed: u64,
) -> Result<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut day = start;
    while !is_weekday(day) {
        day = day + Days::new(1);
    }
    let mut series = Vec::with_capacity(returns.n_vars());
    let mut weekdays = vec![day];
    for _ in 0..returns.n_obs() {
        let mut next = *weekdays.last().expect("non-empty") + Days::new(1);
        while !is_weekday(next) {
            next = next + Days::new(1);
        }
        weekdays.push(next);
    }
    for (col, ticker) in returns.tickers.iter().enumerate() {
        let mut level = 100.0 * (1.0 + col as f64 * 0.25);
        let mut obs = vec![(weekdays[0], level)];
        let weekend = seven_day.contains(ticker);
        for row in 0..returns.n_obs() {
            let (prev, cur) = (weekdays[row], weekdays[row + 1]);
            if weekend {
                let mut d = prev + Days::new(1);
                while d < cur {
                    let wiggle: f64 = rng.random_range(-0.01..0.01);
                    obs.push((d, level * wiggle.exp()));
                    d = d + Days::new(1);
                }
            }
            level *= returns.values[(row, col)].exp();
            obs.push((cur, level));
        }
        series.push(RawSeries::new(ticker.clone(), obs)?);
    }
    Ok(Fixture {
        process,
        series,
        seven_day: seven_day.to_vec(),
    })
}

fn equicorrelated(sds: &[f64], corr: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let n = sds.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            sds[i] * sds[i]
        } else {
            corr(i, j) * sds[i] * sds[j]
        }
    })
}

/// Three coupled assets on a weekday calendar.
pub fn three_asset_process() -> VarProcess {
    let sds = [0.012, 0.015, 0.010];
    VarProcess {
        tickers: vec!["AAA".into(), "BBB".into(), "CCC".into()],
        intercept: DVector::from_vec(vec![0.0002, 0.0001, 0.0003]),
        coefficients: vec![DMatrix::from_row_slice(
            3,
            3,
            &[0.05, 0.10, 0.00, 0.00, 0.02, 0.15, 0.08, 0.00, -0.03],
        )],
        sigma: equicorrelated(&sds, |_, _| 0.4),
    }
}

/// Five equity-like assets, a sentiment index and a volatile, weakly coupled
/// coin that mostly absorbs lagged equity moves.
pub fn seven_asset_process() -> VarProcess {
    let tickers = ["EQ1", "EQ2", "EQ3", "EQ4", "EQ5", "SENT", "COIN"];
    let sds = [0.014, 0.012, 0.013, 0.015, 0.018, 0.030, 0.045];
    let sigma = equicorrelated(&sds, |i, j| match (i.max(j), i.min(j)) {
        (6, _) => 0.08,
        (5, _) => -0.45,
        _ => 0.5,
    });
    let mut phi = DMatrix::zeros(7, 7);
    for i in 0..7 {
        phi[(i, i)] = 0.03;
    }
    // EQ3 leads the other equities and sentiment; EQ2 to a lesser degree.
    for i in [0, 1, 3, 4] {
        phi[(i, 2)] = 0.12;
    }
    phi[(5, 2)] = -0.25;
    for i in [0, 3, 4] {
        phi[(i, 1)] = 0.05;
    }
    for j in 0..5 {
        phi[(6, j)] = 0.35;
    }
    VarProcess {
        tickers: tickers.iter().map(|s| s.to_string()).collect(),
        intercept: DVector::from_fn(7, |i, _| if i == 6 { 0.001 } else { 0.0002 }),
        coefficients: vec![phi],
        sigma,
    }
}

/// A random stable VAR(p) with `n` variables and a positive-definite covariance.
///
/// Coefficients are uniform on (−0.5, 0.5) and shrunk until the spectral radius is below 0.9.
pub fn random_stable_process(seed: u64, n: usize, p: usize) -> VarProcess {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coefficients: Vec<DMatrix<f64>> = (0..p)
        .map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.5..0.5)))
        .collect();
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let sigma = &a * a.transpose() + DMatrix::identity(n, n) * 0.1;
    let mut process = VarProcess {
        tickers: (0..n).map(|i| format!("V{}", i + 1)).collect(),
        intercept: DVector::zeros(n),
        coefficients: Vec::new(),
        sigma,
    };
    loop {
        process.coefficients = coefficients.clone();
        if process.model().spectral_radius() < 0.9 {
            return process;
        }
        coefficients.iter_mut().for_each(|c| *c *= 0.8);
    }
}

pub fn three_asset_fixture(rows: usize, seed: u64) -> Result<Fixture> {
    let process = three_asset_process();
    let returns = simulate_var(&process, rows, 200, seed)?;
    let start = NaiveDate::from_ymd_opt(2015, 1, 6).expect("valid date");
    prices_from_returns(process, &returns, &[], start, seed)
}

pub fn seven_asset_fixture(rows: usize, seed: u64) -> Result<Fixture> {
    let process = seven_asset_process();
    let returns = simulate_var(&process, rows, 200, seed)?;
    let start = NaiveDate::from_ymd_opt(2015, 1, 6).expect("valid date");
    prices_from_returns(process, &returns, &["COIN".to_string()], start, seed)
}
