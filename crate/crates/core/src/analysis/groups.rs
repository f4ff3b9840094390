use serde::{Deserialize, Serialize};

use crate::analytic::RatioReport;
use crate::metrics::ConvergenceReport;

/// Rows (and products) whose mutual score ratios stay positive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreGroup {
    /// Inclusive range in the canonical row order.
    pub rows: [usize; 2],
    /// Inclusive range in the canonical column order.
    pub cols: Option<[usize; 2]>,
}

fn split(ratios: &[f64], zero: impl Fn(f64) -> bool) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    let mut lo = 0;
    for (i, &r) in ratios.iter().enumerate() {
        if zero(r) {
            out.push([lo, i]);
            lo = i + 1;
        }
    }
    out.push([lo, ratios.len()]);
    out
}

/// Splits the rows of an analytic report at every zero ratio, and the
/// products likewise.
pub fn separate_groups(report: &RatioReport) -> Vec<ScoreGroup> {
    let rows = split(&report.row_ratios, |r| r == 0.0);
    let cols = split(&report.col_ratios, |r| r == 0.0);
    let paired = rows.len() == cols.len();
    rows.into_iter()
        .enumerate()
        .map(|(k, r)| ScoreGroup {
            rows: r,
            cols: paired.then(|| cols[k]),
        })
        .collect()
}

/// Splits the fitness-sorted rows of an iterative run at its zero-ratio
/// pairs. Groups hold original row indices, least fit first.
pub fn separate_run_groups(report: &ConvergenceReport) -> Vec<Vec<usize>> {
    let zero: std::collections::HashSet<(usize, usize)> =
        report.zero_ratio_pairs.iter().copied().collect();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    for (k, &row) in report.row_order.iter().enumerate() {
        current.push(row);
        let next = report.row_order.get(k + 1);
        if next.is_none_or(|&n| zero.contains(&(row, n))) {
            out.push(std::mem::take(&mut current));
        }
    }
    out
}
