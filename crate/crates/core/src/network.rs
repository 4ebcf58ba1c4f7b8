//! Directed spillover graphs from a connectedness report, as DOT or JSON.
//!
//! Nodes are net givers (blue) or net receivers (yellow), sized by |NET|.
//! Each unordered pair with non-zero net transmission gives one edge, pointing
//! from the dominant side; the heaviest edges are drawn bold.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::connectedness::ConnectednessReport;
use crate::error::{Error, Result};

pub const GIVER_COLOR: &str = "#4477CC";
pub const RECEIVER_COLOR: &str = "#EECC44";
pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.75;
pub const JSON_VERSION: u32 = 1;
/// Node width in inches per unit of size.
const WIDTH_PER_SIZE: f64 = 1.5;
const MIN_SIZE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Giver,
    Receiver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emphasis {
    Bold,
    Fine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub ticker: String,
    pub role: Role,
    /// |NET| scaled to [0.3, 1].
    pub size: f64,
    pub net: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    /// Net transmission from source to target, in percent.
    pub weight: f64,
    pub emphasis: Emphasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpilloverNetwork {
    pub label: String,
    pub edge_threshold: f64,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

/// Type-7 (linear interpolation) sample quantile; `values` must be non-empty.
fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn build_network(report: &ConnectednessReport, edge_threshold: f64) -> Result<SpilloverNetwork> {
    if !(0.0..=1.0).contains(&edge_threshold) {
        return Err(Error::Config(format!(
            "edge threshold must be a quantile in [0, 1]; got {edge_threshold}"
        )));
    }
    let abs: Vec<f64> = report.net.iter().map(|v| v.abs()).collect();
    let (lo, hi) = abs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let nodes = report
        .tickers
        .iter()
        .zip(&report.net)
        .zip(&abs)
        .map(|((ticker, &net), &a)| Node {
            ticker: ticker.clone(),
            role: if net > 0.0 { Role::Giver } else { Role::Receiver },
            size: if hi > lo {
                MIN_SIZE + (1.0 - MIN_SIZE) * (a - lo) / (hi - lo)
            } else {
                1.0
            },
            net,
        })
        .collect();

    let n = report.n_vars();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = report.npdc[(i, j)];
            if v > 0.0 {
                pairs.push((i, j, v));
            } else if v < 0.0 {
                pairs.push((j, i, -v));
            }
        }
    }
    let cut = if pairs.is_empty() {
        0.0
    } else {
        quantile(&pairs.iter().map(|p| p.2).collect::<Vec<_>>(), edge_threshold)
    };
    let edges = pairs
        .into_iter()
        .map(|(s, t, w)| Edge {
            source: report.tickers[s].clone(),
            target: report.tickers[t].clone(),
            weight: w,
            emphasis: if w >= cut { Emphasis::Bold } else { Emphasis::Fine },
        })
        .collect();
    Ok(SpilloverNetwork {
        label: report.label.clone(),
        edge_threshold,
        nodes,
        edges,
    })
}

fn escaped(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", escaped(s))
}

pub fn emit_dot(net: &SpilloverNetwork) -> String {
    let mut out = String::new();
    out.push_str("digraph spillover {\n");
    let _ = writeln!(out, "  label={};", quoted(&net.label));
    out.push_str("  node [shape=circle, style=filled, fixedsize=true, fontname=\"Helvetica\"];\n");
    for node in &net.nodes {
        let color = match node.role {
            Role::Giver => GIVER_COLOR,
            Role::Receiver => RECEIVER_COLOR,
        };
        let _ = writeln!(
            out,
            "  {} [fillcolor=\"{color}\", width={:.3}, label=\"{}\\n{:.2}\"];",
            quoted(&node.ticker),
            node.size * WIDTH_PER_SIZE,
            escaped(&node.ticker),
            node.net,
        );
    }
    for e in &net.edges {
        let pen = match e.emphasis {
            Emphasis::Bold => "3.0",
            Emphasis::Fine => "1.0",
        };
        let _ = writeln!(
            out,
            "  {} -> {} [penwidth={pen}, label=\"{:.2}\"];",
            quoted(&e.source),
            quoted(&e.target),
            e.weight
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct DocumentRef<'a> {
    version: u32,
    #[serde(flatten)]
    network: &'a SpilloverNetwork,
}

#[derive(Deserialize)]
struct Document {
    version: u32,
    #[serde(flatten)]
    network: SpilloverNetwork,
}

pub fn emit_json(net: &SpilloverNetwork) -> String {
    let doc = DocumentRef {
        version: JSON_VERSION,
        network: net,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("network serializes");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<SpilloverNetwork> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse(format!("network document: {e}")))?;
    if doc.version != JSON_VERSION {
        return Err(Error::Parse(format!(
            "network document version {} is not supported (expected {JSON_VERSION})",
            doc.version
        )));
    }
    Ok(doc.network)
}
