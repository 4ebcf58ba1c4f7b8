//! Time-varying VAR filter across a regime switch, with per-date TCI.
//!
//!     cargo run --release --example tvp_dynamic

use spillover::connectedness::dynamic_indices;
use spillover::simulate::{random_stable_process, simulate_regimes};
use spillover::tvp::{filter, TvpConfig};

fn main() -> spillover::Result<()> {
    let calm = random_stable_process(1, 4, 1);
    let stressed = random_stable_process(2, 4, 1);
    let panel = simulate_regimes(&[calm, stressed], &[900], 1800, 200, 5)?;

    let cfg = TvpConfig { lag_order: 1, ..TvpConfig::default() };
    let path = filter(&panel, &cfg)?;
    println!("filtered {} dates, {} covariance repairs", path.len(), path.repairs);

    let dynamic = dynamic_indices(&path, 10)?;
    let tci = dynamic.tci_series();
    for k in (0..tci.len()).step_by(100) {
        println!("{}  TCI {:6.2}", dynamic.dates[k], tci[k]);
    }
    let mid = dynamic.dates.partition_point(|d| *d < panel.dates[900]);
    let before = dynamic.average_over(0..mid, "before")?;
    let after = dynamic.average_over(mid..dynamic.len(), "after")?;
    println!("\naverage TCI before {:.2}, after {:.2}", before.tci, after.tci);
    Ok(())
}
