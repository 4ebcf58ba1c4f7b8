//! The connectedness table: N×N share block with Receiver column and
//! Giver, Inc.Own, NET and NPT rows.

use super::ConnectednessReport;
use crate::format::{csv_text, g17, text_table};

fn layout(r: &ConnectednessReport, num: impl Fn(f64) -> String) -> Vec<Vec<String>> {
    let n = r.n_vars();
    let mut rows = Vec::with_capacity(n + 5);
    let mut header = vec![String::new()];
    header.extend(r.tickers.iter().cloned());
    header.push("Receiver".into());
    rows.push(header);
    for i in 0..n {
        let mut row = vec![r.tickers[i].clone()];
        row.extend((0..n).map(|j| num(100.0 * r.shares[(i, j)])));
        row.push(num(r.from[i]));
        rows.push(row);
    }
    let line = |name: &str, values: &[f64], corner: String| {
        let mut row = vec![name.to_string()];
        row.extend(values.iter().map(|v| num(*v)));
        row.push(corner);
        row
    };
    rows.push(line("Giver", &r.to, num(r.to.iter().sum())));
    rows.push(line("Inc.Own", &r.inc_own, "TCI".into()));
    rows.push(line("NET", &r.net, num(r.tci)));
    let mut npt = vec!["NPT".to_string()];
    npt.extend(r.npt.iter().map(usize::to_string));
    npt.push(String::new());
    rows.push(npt);
    rows
}

/// Aligned text with two decimals, followed by the giver and receiver lists.
pub fn report_text(r: &ConnectednessReport) -> String {
    let mut out = text_table(&layout(r, |v| format!("{v:.2}")));
    out.push_str(&format!("\nGivers: {}\n", r.givers().join(", ")));
    out.push_str(&format!("Receivers: {}\n", r.receivers().join(", ")));
    out
}

/// Same layout at full precision.
pub fn report_csv(r: &ConnectednessReport) -> String {
    csv_text(&layout(r, g17))
}

/// One row per ordered pair i ≠ j: net transmission from i to j, PCI and PII.
pub fn pairwise_csv(r: &ConnectednessReport) -> String {
    let mut rows = vec![["from", "to", "npdc", "pci", "pii"].map(String::from).to_vec()];
    let n = r.n_vars();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            rows.push(vec![
                r.tickers[i].clone(),
                r.tickers[j].clone(),
                g17(r.npdc[(i, j)]),
                g17(r.pci[(i, j)]),
                g17(r.pii[(i, j)]),
            ]);
        }
    }
    csv_text(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectedness::{indices, FevdTable};
    use nalgebra::DMatrix;

    fn report() -> ConnectednessReport {
        let l = DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.1, 0.9]);
        indices(
            &FevdTable {
                tickers: vec!["AA".into(), "BB".into()],
                horizon: 10,
                raw: l.clone(),
                normalized: l,
            },
            "t",
        )
    }

    #[test]
    fn text_layout() {
        let expected = concat!(
            "             AA      BB  Receiver\n",
            "AA        70.00   30.00     30.00\n",
            "BB        10.00   90.00     10.00\n",
            "Giver     10.00   30.00     40.00\n",
            "Inc.Own   80.00  120.00       TCI\n",
            "NET      -20.00   20.00     20.00\n",
            "NPT           0       1\n",
            "\n",
            "Givers: BB\n",
            "Receivers: AA\n",
        );
        assert_eq!(report_text(&report()), expected);
    }

    #[test]
    fn csv_layout() {
        let csv = report_csv(&report());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], ",AA,BB,Receiver");
        assert_eq!(lines.len(), 7);
        assert!(lines[4].ends_with(",TCI"));
        assert!(lines[6].starts_with("NPT,0,1,"));
        let pairs = pairwise_csv(&report());
        assert_eq!(pairs.lines().count(), 3);
        assert!(pairs.lines().nth(2).unwrap().starts_with("BB,AA,2"));
    }
}
