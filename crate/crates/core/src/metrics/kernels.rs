//! Sparse sums behind the FCM, MEM and generalized updates.
//!
//! Each output entry is a sequential sum over one row or column, so the
//! parallel and serial paths give identical bits.

use rayon::prelude::*;

use crate::bimatrix::BinaryBipartiteMatrix;

/// Below this many links the rayon overhead outweighs the work.
const PARALLEL_NNZ: usize = 1 << 15;

fn for_each_line<F>(out: &mut [f64], nnz: usize, f: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    if nnz >= PARALLEL_NNZ {
        out.par_iter_mut().enumerate().for_each(|(k, o)| *o = f(k));
    } else {
        out.iter_mut().enumerate().for_each(|(k, o)| *o = f(k));
    }
}

/// `out[i] = Σ_a M_ia q_a`
pub(crate) fn row_sums(m: &BinaryBipartiteMatrix, q: &[f64], out: &mut [f64]) {
    for_each_line(out, m.nnz(), |i| {
        m.row(i).iter().map(|&a| q[a as usize]).sum()
    });
}

/// `out[a] = 1 / Σ_i M_ia / f_i`
pub(crate) fn harmonic(m: &BinaryBipartiteMatrix, f: &[f64], out: &mut [f64]) {
    for_each_line(out, m.nnz(), |a| {
        1.0 / m.col(a).iter().map(|&i| 1.0 / f[i as usize]).sum::<f64>()
    });
}

/// `out[a] = (Σ_i M_ia f_i^-γ)^(-1/γ)`, factored through the column minimum
/// so large γ neither overflows nor underflows.
pub(crate) fn power_mean(m: &BinaryBipartiteMatrix, f: &[f64], gamma: f64, out: &mut [f64]) {
    for_each_line(out, m.nnz(), |a| {
        let col = m.col(a);
        let fmin = col
            .iter()
            .map(|&i| f[i as usize])
            .fold(f64::INFINITY, f64::min);
        let s: f64 = col
            .iter()
            .map(|&i| (fmin / f[i as usize]).powf(gamma))
            .sum();
        fmin * s.powf(-1.0 / gamma)
    });
}

/// `out[a] = min_i { f_i : M_ia = 1 }`
pub(crate) fn col_min(m: &BinaryBipartiteMatrix, f: &[f64], out: &mut [f64]) {
    for_each_line(out, m.nnz(), |a| {
        m.col(a)
            .iter()
            .map(|&i| f[i as usize])
            .fold(f64::INFINITY, f64::min)
    });
}
