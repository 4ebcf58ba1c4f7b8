#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use spillover::connectedness::ConnectednessReport;
use spillover::pipeline::RunConfig;
use spillover::var::VarModel;

pub fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Bundled fixture config writing into `out`.
pub fn fixture_config(name: &str, out: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(fixture_dir(name).join("config.toml")).expect("fixture config loads");
    cfg.output_dir = out.to_path_buf();
    cfg
}

/// Generalized-impulse FEVD by brute force: simulate H-step forecast errors of a
/// VAR(1) by iterating the recursion on drawn shocks, and the part of each error
/// driven by the projection of the shocks on u_j, then take sample second moments.
/// Returns the row-normalized shares.
pub fn monte_carlo_gfevd(model: &VarModel, horizon: usize, paths: usize, seed: u64) -> DMatrix<f64> {
    assert_eq!(model.lag_order(), 1, "the oracle propagates VAR(1) systems");
    let n = model.n_vars();
    let phi = &model.coefficients[0];
    let sigma = &model.sigma;
    let chol = sigma.clone().cholesky().expect("positive definite").l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut num = DMatrix::<f64>::zeros(n, n);
    let mut den = DVector::<f64>::zeros(n);
    let mut full = DVector::<f64>::zeros(n);
    let mut part: Vec<DVector<f64>> = vec![DVector::zeros(n); n];
    for _ in 0..paths {
        full.fill(0.0);
        part.iter_mut().for_each(|v| v.fill(0.0));
        for _ in 0..horizon {
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let u = &chol * z;
            full = phi * &full + &u;
            for (j, v) in part.iter_mut().enumerate() {
                // E[u | u_j] = Σ e_j u_j / σ_jj
                let proj = sigma.column(j) * (u[j] / sigma[(j, j)]);
                *v = phi * &*v + proj;
            }
        }
        for i in 0..n {
            den[i] += full[i] * full[i];
            for j in 0..n {
                num[(i, j)] += part[j][i] * part[j][i];
            }
        }
    }
    let mut d = DMatrix::from_fn(n, n, |i, j| num[(i, j)] / den[i]);
    for mut row in d.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    d
}

/// Every file under `root`, keyed by relative path.
pub fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Files of the three-asset fixture run that are frozen as golden copies.
pub const GOLDEN_FILES: &[&str] = &[
    "diagnostics/descriptive.txt",
    "diagnostics/adf.txt",
    "diagnostics/chow.txt",
    "diagnostics/descriptive.csv",
    "static/var_estimate.txt",
    "static/connectedness.txt",
    "static/connectedness.csv",
    "static/connectedness.json",
    "static/pairwise.csv",
    "static/network.dot",
    "static/network.json",
    "dynamic/full/connectedness.txt",
    "dynamic/full/connectedness.csv",
    "dynamic/before/connectedness.txt",
    "dynamic/after/network.dot",
    "dynamic/after/network.json",
    "dynamic/tci.csv",
];

/// Relative tolerance for numbers in CSV, JSON and snapshot goldens. Text tables
/// and DOT files round to two decimals and are compared byte for byte.
pub const GOLDEN_NUMERIC_TOL: f64 = 1e-9;

fn numeric_match(a: &str, b: &str) -> bool {
    let split = |s: &str| -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = String::new();
        for ch in s.chars() {
            if ch.is_ascii_digit() || matches!(ch, '.' | '-' | '+' | 'e' | 'E') {
                cur.push(ch);
            } else {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
        out
    };
    let (ta, tb) = (split(a), split(b));
    ta.len() == tb.len()
        && ta.iter().zip(&tb).all(|(x, y)| {
            x == y
                || match (x.parse::<f64>(), y.parse::<f64>()) {
                    (Ok(u), Ok(v)) => (u - v).abs() <= GOLDEN_NUMERIC_TOL * u.abs().max(v.abs()).max(1e-12),
                    _ => false,
                }
        })
}

/// Compare a run tree to the golden copies; `UPDATE_GOLDEN=1` rewrites them instead.
/// Returns the mismatching files.
pub fn check_goldens(run_root: &Path) -> Vec<String> {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut bad = Vec::new();
    for rel in GOLDEN_FILES {
        let got = std::fs::read_to_string(run_root.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"));
        let golden = golden_dir().join(rel);
        if update {
            std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
            std::fs::write(&golden, &got).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&golden).unwrap_or_else(|e| panic!("golden {rel}: {e}"));
        let exact = rel.ends_with(".txt") && !rel.ends_with("var_estimate.txt") || rel.ends_with(".dot");
        let ok = if exact { got == want } else { numeric_match(&got, &want) };
        if !ok {
            bad.push(rel.to_string());
        }
    }
    bad
}

/// Run diagnostics, static and dynamic on the three-asset fixture into `out`.
pub fn run_three_asset(out: &Path) {
    let cfg = fixture_config("three_asset", out);
    spillover::pipeline::run_static(&cfg).unwrap();
    spillover::pipeline::run_dynamic(&cfg).unwrap();
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Index identities every report must satisfy; returns a description of the first violation.
pub fn identity_violation(r: &ConnectednessReport) -> Option<String> {
    let n = r.n_vars();
    for i in 0..n {
        let row_sum = r.shares.row(i).sum();
        if (row_sum - 1.0).abs() > 1e-10 {
            return Some(format!("row {i} of l sums to {row_sum}"));
        }
        if (r.inc_own[i] - r.to[i] - 100.0 * r.shares[(i, i)]).abs() > 1e-8 {
            return Some(format!("Inc.Own mismatch on {i}"));
        }
        for j in 0..n {
            if r.npdc[(i, j)] != -r.npdc[(j, i)] {
                return Some(format!("npdc not antisymmetric at ({i}, {j})"));
            }
            if !(-1.0..=1.0).contains(&r.pii[(i, j)]) || !(0.0..=1.0).contains(&r.pci[(i, j)]) {
                return Some(format!("PII/PCI out of bounds at ({i}, {j})"));
            }
        }
    }
    let net: f64 = r.net.iter().sum();
    if net.abs() > 1e-8 {
        return Some(format!("NET sums to {net}"));
    }
    let nf = n as f64;
    let mean_from = r.from.iter().sum::<f64>() / nf;
    let mean_to = r.to.iter().sum::<f64>() / nf;
    if (r.tci - mean_from).abs() > 1e-8 || (r.tci - mean_to).abs() > 1e-8 {
        return Some(format!("TCI {} vs mean FROM {mean_from} / mean TO {mean_to}", r.tci));
    }
    None
}
