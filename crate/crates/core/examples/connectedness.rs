//! Generalized FEVD and the connectedness table for a known VAR.
//!
//!     cargo run --example connectedness

use spillover::connectedness::{connectedness, gfevd, report_text};
use spillover::simulate::seven_asset_process;

fn main() -> spillover::Result<()> {
    let model = seven_asset_process().model();

    let fevd = gfevd(&model, 10)?;
    println!("row sums of the normalized shares:");
    for (t, row) in model.tickers.iter().zip(fevd.normalized.row_iter()) {
        println!("  {t:<5} {:.12}", row.sum());
    }

    let report = connectedness(&model, 10, "population")?;
    println!("\n{}", report_text(&report));

    // The same decomposition a step ahead and far out
    for h in [1, 5, 20, 50] {
        println!("H = {h:>2}: TCI {:.2}", connectedness(&model, h, "")?.tci);
    }
    Ok(())
}
