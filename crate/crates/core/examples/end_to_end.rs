//! Generate the three-asset fixture in a temp directory and run every stage on it.
//!
//!     cargo run --release --example end_to_end [output-dir]

use std::path::PathBuf;

use spillover::pipeline::{self, FixtureKind, RunConfig};

fn main() -> spillover::Result<()> {
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spillover-demo"));
    let data = root.join("data");
    pipeline::run_simulate(FixtureKind::ThreeAsset, 900, 21, &data)?;

    let mut cfg = RunConfig::load(data.join("config.toml"))?;
    cfg.output_dir = root.join("out");
    for run in [pipeline::run_diagnostics, pipeline::run_static, pipeline::run_dynamic] {
        let outcome = run(&cfg)?;
        for w in &outcome.warnings {
            eprintln!("warning: {w}");
        }
        println!("{} files under {}", outcome.files.len(), outcome.output_dir.display());
    }
    println!("\n{}", std::fs::read_to_string(cfg.output_dir.join("static/connectedness.txt")).unwrap());
    Ok(())
}
