//! Synthetic perfectly nested matrices.

use super::{BinaryBipartiteMatrix, NestedProfile};
use crate::{Error, Result};

/// Products per country used by Model A unless told otherwise.
pub const DEFAULT_M_RATIO: f64 = 5.48;

/// Model A: `M = floor(m_ratio * n)` and country `i` (1-based) exports the
/// first `min(M, 1 + floor(M * (i/n)^alpha))` products.
///
/// For `alpha < 1` the profile is concave, so every country except the last
/// lies strictly above the diagonal.
pub fn generate_model_a(n: usize, alpha: f64, m_ratio: f64) -> Result<BinaryBipartiteMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "model A needs n >= 2, got {n}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "model A needs 0 < alpha < 1, got {alpha}"
        )));
    }
    if !(m_ratio.is_finite() && m_ratio > 0.0) {
        return Err(Error::InvalidParameter(format!("bad m_ratio {m_ratio}")));
    }
    let m = (m_ratio * n as f64).floor() as usize;
    if m < 1 {
        return Err(Error::InvalidParameter("model A has no products".into()));
    }
    let degrees: Vec<usize> = (1..=n)
        .map(|i| {
            let fill = (m as f64 * (i as f64 / n as f64).powf(alpha)).floor() as usize;
            (1 + fill).min(m)
        })
        .collect();
    // Concavity keeps N*D_i > M*i; check it rather than trust rounding.
    for (k, &d) in degrees.iter().enumerate().take(n - 1) {
        if n * d <= (k + 1) * m {
            return Err(Error::InvalidParameter(format!(
                "model A row {} touches the diagonal",
                k + 1
            )));
        }
    }
    Ok(NestedProfile::from_degrees(&degrees)?.to_matrix())
}

/// Model B: country 1 exports `x + k1` products and each next country adds
/// `k1` products up to country `max(1, floor(alpha*(n-1)))`, then `k2`.
pub fn generate_model_b(
    n: usize,
    x: usize,
    alpha: f64,
    k1: usize,
    k2: usize,
) -> Result<BinaryBipartiteMatrix> {
    if n < 1 || x < 1 || k1 < 1 || k2 < 1 {
        return Err(Error::InvalidParameter(
            "model B counts must all be >= 1".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "model B needs 0 < alpha < 1, got {alpha}"
        )));
    }
    let knee = ((alpha * (n - 1) as f64).floor() as usize).max(1);
    let mut degrees = Vec::with_capacity(n);
    let mut d = x + k1;
    degrees.push(d);
    for i in 1..n {
        d += if i <= knee { k1 } else { k2 };
        degrees.push(d);
    }
    Ok(NestedProfile::from_degrees(&degrees)?.to_matrix())
}
