//! Build the spillover network for a connectedness table and print DOT and JSON.
//!
//!     cargo run --example network_export | dot -Tsvg > net.svg

use spillover::connectedness::connectedness;
use spillover::network::{build_network, emit_dot, emit_json, DEFAULT_EDGE_THRESHOLD};
use spillover::simulate::seven_asset_process;

fn main() -> spillover::Result<()> {
    let report = connectedness(&seven_asset_process().model(), 10, "population")?;
    let net = build_network(&report, DEFAULT_EDGE_THRESHOLD)?;
    eprintln!("givers: {:?}", report.givers());
    eprintln!("{} nodes, {} edges, bold at weight >= {:.3}", net.nodes.len(), net.edges.len(), net.edge_threshold);
    print!("{}", emit_dot(&net));
    eprintln!("{}", emit_json(&net));
    Ok(())
}
