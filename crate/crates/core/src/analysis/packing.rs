use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bimatrix::{check_permutation, BinaryBipartiteMatrix};
use crate::metrics::{run, Algo, RunOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Col,
}

/// Lines that shared a score, listed in the order they were placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieGroup {
    pub axis: Axis,
    pub score: f64,
    pub members: Vec<usize>,
}

/// Row and column orders that expose the nested border.
///
/// Rows go from most to least fit. Columns go from least to most complex,
/// so the filled region sits in the top-left corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
    pub tie_break_log: Vec<TieGroup>,
    pub converged: bool,
}

/// Ranks by score. Equal scores put the higher degree first, then the lower
/// index.
pub fn packing_from_scores(
    m: &BinaryBipartiteMatrix,
    fitness: &[f64],
    complexity: &[f64],
) -> Result<Packing> {
    for (expected, got) in [(m.n_rows(), fitness.len()), (m.n_cols(), complexity.len())] {
        if expected != got {
            return Err(Error::DimensionMismatch { expected, got });
        }
    }
    let rd = m.row_degrees();
    let cd = m.col_degrees();
    let mut rows: Vec<usize> = (0..m.n_rows()).collect();
    rows.sort_by(|&a, &b| {
        fitness[b]
            .total_cmp(&fitness[a])
            .then(rd[b].cmp(&rd[a]))
            .then(a.cmp(&b))
    });
    let mut cols: Vec<usize> = (0..m.n_cols()).collect();
    cols.sort_by(|&a, &b| {
        complexity[a]
            .total_cmp(&complexity[b])
            .then(cd[b].cmp(&cd[a]))
            .then(a.cmp(&b))
    });
    let mut log = ties(Axis::Row, &rows, fitness);
    log.extend(ties(Axis::Col, &cols, complexity));
    Ok(Packing {
        row_order: rows,
        col_order: cols,
        tie_break_log: log,
        converged: true,
    })
}

fn ties(axis: Axis, order: &[usize], score: &[f64]) -> Vec<TieGroup> {
    order
        .chunk_by(|&a, &b| score[a] == score[b])
        .filter(|c| c.len() > 1)
        .map(|c| TieGroup {
            axis,
            score: score[c[0]],
            members: c.to_vec(),
        })
        .collect()
}

/// Runs the metric and sorts by the resulting scores. A run that hits
/// `max_iter` still yields a packing, with `converged: false`.
pub fn pack(m: &BinaryBipartiteMatrix, algo: Algo, opts: &RunOptions) -> Result<Packing> {
    let (state, report) = run(m, algo, opts)?;
    let mut p = packing_from_scores(m, &state.fitness, &state.complexity)?;
    p.converged = report.converged;
    Ok(p)
}

fn check(m: &BinaryBipartiteMatrix, p: &Packing) -> Result<()> {
    check_permutation(&p.row_order, m.n_rows())?;
    check_permutation(&p.col_order, m.n_cols())
}

/// Cells that differ from the closest stepwise matrix in packed order.
///
/// Each packed row is compared with the best prefix `[0, L)` of packed
/// columns; the count is the sum of the per-row minimum mismatches. It is
/// zero exactly when every packed row is a prefix, that is when the packed
/// matrix is perfectly nested.
pub fn border_violations(m: &BinaryBipartiteMatrix, p: &Packing) -> Result<usize> {
    check(m, p)?;
    let mut col_pos = vec![0usize; m.n_cols()];
    for (k, &a) in p.col_order.iter().enumerate() {
        col_pos[a] = k;
    }
    let mut total = 0;
    let mut pos = Vec::new();
    for &i in &p.row_order {
        pos.clear();
        pos.extend(m.row(i).iter().map(|&a| col_pos[a as usize]));
        pos.sort_unstable();
        let ones = pos.len();
        // L = 0 misses every one; L = pos[k] + 1 has pos[k] + 1 - (k + 1)
        // holes and ones - (k + 1) ones outside.
        let best = pos
            .iter()
            .enumerate()
            .map(|(k, &c)| (c - k) + (ones - k - 1))
            .min()
            .unwrap_or(0)
            .min(ones);
        total += best;
    }
    Ok(total)
}

/// Packed matrix as a plain PGM image: 255 for a link, 0 for an empty cell.
pub fn render_pgm(m: &BinaryBipartiteMatrix, p: &Packing) -> Result<String> {
    let packed = m.permute(&p.row_order, &p.col_order)?;
    let mut out = format!("P2\n{} {}\n255\n", packed.n_cols(), packed.n_rows());
    for row in packed.to_dense() {
        let line: Vec<&str> = row
            .iter()
            .map(|&v| if v == 1 { "255" } else { "0" })
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    Ok(out)
}

/// Packed matrix as dense 0/1 CSV.
pub fn render_csv(m: &BinaryBipartiteMatrix, p: &Packing) -> Result<String> {
    let packed = m.permute(&p.row_order, &p.col_order)?;
    let mut out = String::new();
    for row in packed.to_dense() {
        let line: Vec<&str> = row
            .iter()
            .map(|&v| if v == 1 { "1" } else { "0" })
            .collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    Ok(out)
}
