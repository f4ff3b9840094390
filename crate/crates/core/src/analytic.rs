//! Exact score ratios on perfectly nested matrices.
//!
//! Countries are labelled by increasing diversification and products by
//! decreasing ubiquity, as in [`NestedProfile::to_matrix`]. Ratios compare
//! neighbours: `row_ratios[i] = F_i / F_{i+1}` and
//! `col_ratios[a] = Q_a / Q_{a+1}`, all 0-based.
//!
//! Closed forms are evaluated from exact integer numerators and denominators,
//! so the only rounding is the final division.

use serde::{Deserialize, Serialize};

use crate::bimatrix::NestedProfile;
use crate::metrics::{ConvergenceReport, RunOptions, SCORE_FLOOR};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RatioMethod {
    MemClosed,
    FcmClosed,
    FcmBlocked,
}

/// Inclusive 0-based row and column ranges of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub rows: [usize; 2],
    pub cols: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub method: RatioMethod,
    pub row_ratios: Vec<f64>,
    pub col_ratios: Vec<f64>,
    pub blocks: Vec<Block>,
}

impl RatioReport {
    /// Indices `i` with `row_ratios[i] == 0`.
    pub fn row_boundaries(&self) -> Vec<usize> {
        zeros(&self.row_ratios)
    }

    /// Indices `a` with `col_ratios[a] == 0`.
    pub fn col_boundaries(&self) -> Vec<usize> {
        zeros(&self.col_ratios)
    }
}

fn zeros(v: &[f64]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, &r)| r == 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Adjacent ratios of score vectors given in the canonical order.
pub fn score_ratios(fitness: &[f64], complexity: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let ratio = |v: &[f64]| v.windows(2).map(|w| w[0] / w[1]).collect();
    (ratio(fitness), ratio(complexity))
}

fn ratio(num: i128, den: i128) -> f64 {
    num as f64 / den as f64
}

/// MEM limit ratios: `F_i / F_{i+1} = 1 - Δ_{i+1} / max_{j<=i+1} Δ_j`.
///
/// A product's complexity is the fitness of its least diversified exporter,
/// so column ratios are products of row ratios.
pub fn mem_ratios(p: &NestedProfile) -> RatioReport {
    let big_delta = p.big_delta();
    let mut running = 0;
    let mut row_ratios = Vec::with_capacity(big_delta.len().saturating_sub(1));
    for (k, &dl) in big_delta.iter().enumerate() {
        running = running.max(dl);
        if k > 0 {
            row_ratios.push(ratio((running - dl) as i128, running as i128));
        }
    }
    let degrees = p.degrees();
    // first[a]: first country exporting product a.
    let mut first = Vec::with_capacity(p.n_cols());
    let mut c = 0;
    for a in 0..p.n_cols() {
        while degrees[c] <= a {
            c += 1;
        }
        first.push(c);
    }
    let col_ratios = first
        .windows(2)
        .map(|w| row_ratios[w[0]..w[1]].iter().product())
        .collect();
    let blocks = blocks_from_row_zeros(&row_ratios, &degrees);
    RatioReport {
        method: RatioMethod::MemClosed,
        row_ratios,
        col_ratios,
        blocks,
    }
}

fn blocks_from_row_zeros(row_ratios: &[f64], degrees: &[usize]) -> Vec<Block> {
    let n = degrees.len();
    let mut blocks = Vec::new();
    let (mut r0, mut c0) = (0, 0);
    for i in zeros(row_ratios).into_iter().chain(std::iter::once(n - 1)) {
        blocks.push(Block {
            rows: [r0, i],
            cols: [c0, degrees[i] - 1],
        });
        r0 = i + 1;
        c0 = degrees[i];
    }
    blocks
}

/// True when the line from the origin to `(M, N)` stays inside the filled
/// region: `e_m d_i > e_i d_m` for every group but the last.
pub fn fcm_crossing_condition(p: &NestedProfile) -> bool {
    let (d, e) = (p.d(), p.e());
    let (dm, em) = (p.n_cols() as i128, p.n_rows() as i128);
    (0..p.m() - 1).all(|i| em * d[i] as i128 > e[i] as i128 * dm)
}

/// FCM limit ratios when the crossing condition holds.
///
/// `F_i / F_{i+1} = (N D_i - i M) / (N D_{i+1} - i M)` and
/// `Q_a / Q_{a+1} = (a N - M E_{a+1}) / (a N - M E_a)` with 1-based labels,
/// where `E_a` counts the countries that do not export product `a`.
pub fn fcm_ratios(p: &NestedProfile) -> Result<RatioReport> {
    if !fcm_crossing_condition(p) {
        return Err(Error::CrossingDetected);
    }
    let degrees = p.degrees();
    let (row_ratios, col_ratios) = block_ratios(&degrees, 0, degrees.len());
    Ok(RatioReport {
        method: RatioMethod::FcmClosed,
        row_ratios,
        col_ratios,
        blocks: vec![Block {
            rows: [0, p.n_rows() - 1],
            cols: [0, p.n_cols() - 1],
        }],
    })
}

/// Ratios inside the block made of countries `r0..r0 + j` and products
/// `c0..c0 + D_{j}`, where `c0` is the diversification of country `r0 - 1`.
fn block_ratios(degrees: &[usize], r0: usize, j: usize) -> (Vec<f64>, Vec<f64>) {
    let c0 = if r0 == 0 { 0 } else { degrees[r0 - 1] };
    let local: Vec<i128> = degrees[r0..r0 + j]
        .iter()
        .map(|&x| (x - c0) as i128)
        .collect();
    let jj = j as i128;
    let dj = local[j - 1];
    let rows = (1..j)
        .map(|i| {
            let i_ = i as i128;
            ratio(jj * local[i - 1] - i_ * dj, jj * local[i] - i_ * dj)
        })
        .collect();
    // not_exporting[a - 1] = E_a for a = 1..=dj.
    let mut not_exporting = Vec::with_capacity(dj as usize + 1);
    let mut k = 0;
    for a in 1..=dj {
        while k < j && local[k] < a {
            k += 1;
        }
        not_exporting.push(k as i128);
    }
    let cols = (1..dj)
        .map(|a| {
            let e_a = not_exporting[a as usize - 1];
            let e_next = not_exporting[a as usize];
            ratio(a * jj - dj * e_next, a * jj - dj * e_a)
        })
        .collect();
    (rows, cols)
}

/// FCM limit ratios for any perfectly nested matrix.
///
/// # Algorithm
///
/// With the remaining countries relabelled from 1 and their diversification
/// measured from the first remaining product, take `j_max` as the largest `j`
/// with `j D_i - i D_j > 0` for all `i < j`. The first `j_max` countries and
/// first `D_{j_max}` products form a block whose ratios follow the
/// non-crossing formulas with `N = j_max` and `M = D_{j_max}`. The ratio
/// across the block edge is zero. Remove the block and repeat.
pub fn fcm_blocked_ratios(p: &NestedProfile) -> RatioReport {
    let degrees = p.degrees();
    let n = degrees.len();
    let mut row_ratios = Vec::with_capacity(n - 1);
    let mut col_ratios = Vec::with_capacity(p.n_cols() - 1);
    let mut blocks = Vec::new();
    let mut r0 = 0;
    while r0 < n {
        let j = block_end(&degrees, r0);
        let (rows, cols) = block_ratios(&degrees, r0, j);
        row_ratios.extend(rows);
        col_ratios.extend(cols);
        let c0 = if r0 == 0 { 0 } else { degrees[r0 - 1] };
        let c1 = degrees[r0 + j - 1];
        blocks.push(Block {
            rows: [r0, r0 + j - 1],
            cols: [c0, c1 - 1],
        });
        r0 += j;
        if r0 < n {
            row_ratios.push(0.0);
            col_ratios.push(0.0);
        }
    }
    let method = if blocks.len() == 1 {
        RatioMethod::FcmClosed
    } else {
        RatioMethod::FcmBlocked
    };
    RatioReport {
        method,
        row_ratios,
        col_ratios,
        blocks,
    }
}

/// Size of the block starting at country `r0`: the first position where the
/// slope `D'_j / j` attains its minimum.
fn block_end(degrees: &[usize], r0: usize) -> usize {
    let c0 = if r0 == 0 { 0 } else { degrees[r0 - 1] };
    let mut best = 1;
    let mut best_d = (degrees[r0] - c0) as i128;
    for j in 2..=degrees.len() - r0 {
        let dj = (degrees[r0 + j - 1] - c0) as i128;
        // D'_j / j < D'_best / best
        if dj * (best as i128) < best_d * j as i128 {
            best = j;
            best_d = dj;
        }
    }
    best
}

/// Group-level FCM limit ratios `(a, b)` with `a_i = f_i / f_{i+1}` and
/// `b_i = q_i / q_{i+1}`, valid under the crossing condition:
///
/// `a_i = (e_m d_i - d_m e_i) / (e_m d_{i+1} - d_m e_i)`
/// `b_i = (e_m d_i - d_m e_i) / (e_m d_i - d_m e_{i-1})`
pub fn group_ratios(p: &NestedProfile) -> (Vec<f64>, Vec<f64>) {
    let d: Vec<i128> = p.d().iter().map(|&x| x as i128).collect();
    let e: Vec<i128> = p.e().iter().map(|&x| x as i128).collect();
    let (dm, em) = (p.n_cols() as i128, p.n_rows() as i128);
    let mut a = Vec::with_capacity(p.m() - 1);
    let mut b = Vec::with_capacity(p.m() - 1);
    for i in 0..p.m() - 1 {
        let num = em * d[i] - dm * e[i];
        let e_prev = if i == 0 { 0 } else { e[i - 1] };
        a.push(ratio(num, em * d[i + 1] - dm * e[i]));
        b.push(ratio(num, em * d[i] - dm * e_prev));
    }
    (a, b)
}

/// Largest absolute residual of the group-level stationary equations
///
/// `x_i = δ_i y_i / (δ_i y_i + δ_{i+1} (1 - x_{i-1}))`
/// `y_i = ε_{i+1} x_i / (ε_{i+1} x_i + ε_i (1 - y_{i+1}))`
///
/// with `x_0 = y_m = 0`.
pub fn stationary_residual(p: &NestedProfile, x: &[f64], y: &[f64]) -> Result<f64> {
    let k = p.m() - 1;
    for len in [x.len(), y.len()] {
        if len != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: len,
            });
        }
    }
    let delta: Vec<f64> = p.delta().iter().map(|&v| v as f64).collect();
    let eps: Vec<f64> = p.epsilon().iter().map(|&v| v as f64).collect();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        let x_prev = if i == 0 { 0.0 } else { x[i - 1] };
        let y_next = if i + 1 == k { 0.0 } else { y[i + 1] };
        let rx = delta[i] * y[i] / (delta[i] * y[i] + delta[i + 1] * (1.0 - x_prev));
        let ry = eps[i + 1] * x[i] / (eps[i + 1] * x[i] + eps[i] * (1.0 - y_next));
        worst = worst.max((x[i] - rx).abs()).max((y[i] - ry).abs());
    }
    Ok(worst)
}

/// Result of iterating the `m`-group FCM system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedRun {
    /// Group fitness `f_i`.
    pub f: Vec<f64>,
    /// Product-group complexity `q_i`.
    pub q: Vec<f64>,
    /// `f` expanded to every country.
    pub fitness: Vec<f64>,
    /// `q` expanded to every product.
    pub complexity: Vec<f64>,
    pub report: ConvergenceReport,
    /// `x^(n)` for `n = 0..=halt`, when history is recorded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_history: Option<Vec<Vec<f64>>>,
    /// `y^(n)` for `n = 0..=halt`, when history is recorded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_history: Option<Vec<Vec<f64>>>,
}

/// Iterates the FCM reduced to one score per group:
///
/// `f_i = Σ_{j<=i} δ_j q_j`, then `q_i = 1 / Σ_{j>=i} ε_j / f_j` with the new
/// `f`, each followed by rescaling to mean 1 over countries and products.
///
/// Complexity uses the fitness of the same step, which changes the path but
/// not the fixed point. Halting uses the same ratio criterion as
/// [`crate::metrics::run`].
pub fn grouped_fcm_run(p: &NestedProfile, opts: &RunOptions) -> Result<GroupedRun> {
    if opts.epsilon.is_nan() || opts.epsilon <= 0.0 || opts.max_iter < 1 {
        return Err(Error::InvalidParameter(
            "epsilon must be > 0 and max_iter >= 1".into(),
        ));
    }
    let m = p.m();
    let delta: Vec<f64> = p.delta().iter().map(|&v| v as f64).collect();
    let eps: Vec<f64> = p.epsilon().iter().map(|&v| v as f64).collect();
    let n_rows = p.n_rows() as f64;
    let n_cols = p.n_cols() as f64;

    let mut f = vec![1.0; m];
    let mut q = vec![0.0; m];
    let update_q = |f: &[f64], q: &mut [f64]| {
        let mut tail = 0.0;
        for i in (0..m).rev() {
            tail += eps[i] / f[i];
            q[i] = 1.0 / tail;
        }
        let mean = q.iter().zip(&delta).map(|(v, w)| v * w).sum::<f64>() / n_cols;
        q.iter_mut().for_each(|v| *v = (*v / mean).max(SCORE_FLOOR));
    };
    let update_f = |q: &[f64], f: &mut [f64]| {
        let mut head = 0.0;
        for i in 0..m {
            head += delta[i] * q[i];
            f[i] = head;
        }
        let mean = f.iter().zip(&eps).map(|(v, w)| v * w).sum::<f64>() / n_rows;
        f.iter_mut().for_each(|v| *v = (*v / mean).max(SCORE_FLOOR));
    };
    let ratios = |v: &[f64]| -> Vec<f64> { v.windows(2).map(|w| w[0] / w[1]).collect() };

    update_q(&f, &mut q);
    let mut x = ratios(&f);
    let mut x_history = opts.record_history.then(|| vec![x.clone()]);
    let mut y_history = opts.record_history.then(|| vec![ratios(&q)]);
    let mut history = opts.record_history.then(Vec::new);
    let mut converged = false;
    let mut delta_n = f64::INFINITY;
    let mut iteration = 0;
    while iteration < opts.max_iter {
        update_f(&q, &mut f);
        update_q(&f, &mut q);
        iteration += 1;
        if f.iter().chain(&q).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { iteration });
        }
        let x_new = ratios(&f);
        delta_n = x.iter().zip(&x_new).map(|(a, b)| (a - b).abs()).sum();
        x = x_new;
        if let Some(h) = history.as_mut() {
            h.push(delta_n);
        }
        if let (Some(xh), Some(yh)) = (x_history.as_mut(), y_history.as_mut()) {
            xh.push(x.clone());
            yh.push(ratios(&q));
        }
        if delta_n < opts.epsilon {
            converged = true;
            break;
        }
    }

    let groups = p.country_groups();
    let fitness: Vec<f64> = groups.iter().map(|&g| f[g]).collect();
    let complexity: Vec<f64> = p.product_groups().iter().map(|&g| q[g]).collect();
    let row_ratios: Vec<f64> = fitness.windows(2).map(|w| w[0] / w[1]).collect();
    let zero_ratio_pairs = row_ratios
        .iter()
        .enumerate()
        .filter(|(_, &r)| r < opts.zero_ratio_threshold)
        .map(|(i, _)| (i, i + 1))
        .collect();
    let report = ConvergenceReport {
        converged,
        halt_iteration: iteration,
        final_delta: delta_n,
        epsilon: opts.epsilon,
        zero_ratio_pairs,
        row_order: (0..p.n_rows()).collect(),
        row_ratios,
        history,
    };
    Ok(GroupedRun {
        f,
        q,
        fitness,
        complexity,
        report,
        x_history,
        y_history,
    })
}
