use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bimatrix::{generate_model_a, generate_model_b, BinaryBipartiteMatrix};
use crate::metrics::{run, Algo, RunOptions};
use crate::{Error, Result};

/// Generator and its parameters, without the size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum ModelSpec {
    A {
        alpha: f64,
        m_ratio: f64,
    },
    B {
        x: usize,
        alpha: f64,
        k1: usize,
        k2: usize,
    },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::A { .. } => "A",
            ModelSpec::B { .. } => "B",
        }
    }

    pub fn generate(&self, n: usize) -> Result<BinaryBipartiteMatrix> {
        match *self {
            ModelSpec::A { alpha, m_ratio } => generate_model_a(n, alpha, m_ratio),
            ModelSpec::B { x, alpha, k1, k2 } => generate_model_b(n, x, alpha, k1, k2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub params: ModelSpec,
    pub algo: Algo,
    /// Iteration at which the run halted.
    pub n_star: usize,
    pub converged: bool,
}

/// Generates one matrix per size and records the halting iteration. Sizes
/// run in parallel; the output keeps the input order. A size that hits
/// `max_iter` is recorded with `converged: false`.
pub fn scaling_study(
    model: &ModelSpec,
    sizes: &[usize],
    algo: Algo,
    opts: &RunOptions,
) -> Result<Vec<ScalingPoint>> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "sizes must be non-empty and ascending".into(),
        ));
    }
    sizes
        .par_iter()
        .map(|&n| {
            let m = model.generate(n)?;
            let (_, report) = run(&m, algo, opts)?;
            log::info!(
                "model {} N={n} {algo}: n* = {}",
                model.name(),
                report.halt_iteration
            );
            Ok(ScalingPoint {
                n,
                params: *model,
                algo,
                n_star: report.halt_iteration,
                converged: report.converged,
            })
        })
        .collect()
}

/// `model,algo,N,n_star,converged` rows with a header.
pub fn scaling_csv(points: &[ScalingPoint]) -> String {
    let mut out = String::from("model,algo,N,n_star,converged\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.params.name(),
            p.algo,
            p.n,
            p.n_star,
            p.converged
        );
    }
    out
}

/// Least-squares fit of `n* = slope * ln N + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn log_fit(points: &[ScalingPoint]) -> Result<LogFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("fit needs two points".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.n_star as f64).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "fit needs two distinct sizes".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LogFit {
        slope,
        intercept,
        r_squared,
    })
}
