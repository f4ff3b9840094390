//! Iterative FCM, MEM and generalized-γ scores.
//!
//! All runs start from `F = Q = 1`. Fitness is rescaled to mean 1 after every
//! step. FCM and the γ family also rescale complexity; MEM sets each product's
//! complexity to the fitness of its least fit exporter.
//!
//! # Halting
//!
//! After each step the rows are sorted by fitness (ties by diversification,
//! then index) and the adjacent ratios `r_k = F_k / F_{k+1}` are formed. The
//! run stops at the first step `n` where `Σ_k |r_k^(n-1) - r_k^(n)| < ε`.

mod kernels;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bimatrix::BinaryBipartiteMatrix;
use crate::{Error, Result};

/// Scores are never allowed below this value.
pub const SCORE_FLOOR: f64 = 1e-300;

pub const DEFAULT_EPSILON: f64 = 1e-5;
pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_ZERO_RATIO_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Algo {
    Fcm,
    Mem,
    /// FCM with the harmonic mean replaced by the power mean of order `-γ`.
    Gamma(f64),
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algo::Fcm => f.write_str("fcm"),
            Algo::Mem => f.write_str("mem"),
            Algo::Gamma(g) => write!(f, "gamma:{g}"),
        }
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fcm" => Ok(Algo::Fcm),
            "mem" => Ok(Algo::Mem),
            other => {
                let g = other
                    .strip_prefix("gamma:")
                    .and_then(|g| g.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm `{s}`")))?;
                if !(g > 0.0 && g.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "gamma must be > 0, got {g}"
                    )));
                }
                Ok(Algo::Gamma(g))
            }
        }
    }
}

impl From<Algo> for String {
    fn from(a: Algo) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Algo {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Row and column scores after `iteration` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreState {
    pub fitness: Vec<f64>,
    pub complexity: Vec<f64>,
    pub iteration: usize,
    /// Rows whose fitness was raised to [`SCORE_FLOOR`] at some step.
    pub underflow_flags: Vec<bool>,
    /// Columns whose complexity was raised to [`SCORE_FLOOR`] at some step.
    pub complexity_underflow: Vec<bool>,
    /// Mean of the raw fitness before the last rescaling.
    pub fitness_norm: f64,
    /// Mean of the raw complexity before the last rescaling, 1 for MEM.
    pub complexity_norm: f64,
}

impl ScoreState {
    pub fn initial(m: &BinaryBipartiteMatrix) -> Self {
        ScoreState {
            fitness: vec![1.0; m.n_rows()],
            complexity: vec![1.0; m.n_cols()],
            iteration: 0,
            underflow_flags: vec![false; m.n_rows()],
            complexity_underflow: vec![false; m.n_cols()],
            fitness_norm: 1.0,
            complexity_norm: 1.0,
        }
    }

    fn check(&self, m: &BinaryBipartiteMatrix) -> Result<()> {
        for (expected, got) in [
            (m.n_rows(), self.fitness.len()),
            (m.n_cols(), self.complexity.len()),
            (m.n_rows(), self.underflow_flags.len()),
            (m.n_cols(), self.complexity_underflow.len()),
        ] {
            if expected != got {
                return Err(Error::DimensionMismatch { expected, got });
            }
        }
        Ok(())
    }
}

/// In-place iteration with reusable buffers.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    m: &'a BinaryBipartiteMatrix,
    algo: Algo,
    state: ScoreState,
    buf: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(m: &'a BinaryBipartiteMatrix, algo: Algo) -> Self {
        Self::from_state(m, algo, ScoreState::initial(m)).expect("initial state fits")
    }

    pub fn from_state(m: &'a BinaryBipartiteMatrix, algo: Algo, state: ScoreState) -> Result<Self> {
        state.check(m)?;
        if let Algo::Gamma(g) = algo {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "gamma must be > 0, got {g}"
                )));
            }
        }
        Ok(Stepper {
            m,
            algo,
            state,
            buf: Vec::new(),
        })
    }

    pub fn state(&self) -> &ScoreState {
        &self.state
    }

    pub fn into_state(self) -> ScoreState {
        self.state
    }

    pub fn step(&mut self) -> Result<()> {
        let m = self.m;
        let s = &mut self.state;
        let n = s.iteration + 1;
        let mut f_new = std::mem::take(&mut self.buf);
        f_new.resize(m.n_rows(), 0.0);
        kernels::row_sums(m, &s.complexity, &mut f_new);
        match self.algo {
            Algo::Mem => {
                s.fitness_norm = rescale(&mut f_new, &mut s.underflow_flags, n)?;
                kernels::col_min(m, &f_new, &mut s.complexity);
                s.complexity_norm = 1.0;
            }
            Algo::Fcm | Algo::Gamma(_) => {
                // Complexity uses the previous fitness.
                match self.algo {
                    Algo::Gamma(g) if g != 1.0 => {
                        kernels::power_mean(m, &s.fitness, g, &mut s.complexity)
                    }
                    _ => kernels::harmonic(m, &s.fitness, &mut s.complexity),
                }
                s.fitness_norm = rescale(&mut f_new, &mut s.underflow_flags, n)?;
                s.complexity_norm = rescale(&mut s.complexity, &mut s.complexity_underflow, n)?;
            }
        }
        self.buf = std::mem::replace(&mut s.fitness, f_new);
        s.iteration = n;
        Ok(())
    }
}

/// Divides by the mean and lifts anything below [`SCORE_FLOOR`].
fn rescale(v: &mut [f64], flags: &mut [bool], iteration: usize) -> Result<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if !(mean.is_finite() && mean > 0.0) || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { iteration });
    }
    for (x, flag) in v.iter_mut().zip(flags.iter_mut()) {
        *x /= mean;
        if *x < SCORE_FLOOR {
            *x = SCORE_FLOOR;
            *flag = true;
        }
    }
    Ok(mean)
}

fn one_step(m: &BinaryBipartiteMatrix, s: &ScoreState, algo: Algo) -> Result<ScoreState> {
    let mut st = Stepper::from_state(m, algo, s.clone())?;
    st.step()?;
    Ok(st.into_state())
}

/// One FCM step: `F̃_i = Σ_a M_ia Q_a`, `Q̃_a = 1 / Σ_i M_ia / F_i`, both from
/// the previous state, then both rescaled to mean 1.
pub fn fcm_step(m: &BinaryBipartiteMatrix, s: &ScoreState) -> Result<ScoreState> {
    one_step(m, s, Algo::Fcm)
}

/// One MEM step: `F̃_i = Σ_a M_ia Q_a`, rescaled, then `Q_a` is the smallest
/// new fitness among the exporters of `a`.
pub fn mem_step(m: &BinaryBipartiteMatrix, s: &ScoreState) -> Result<ScoreState> {
    one_step(m, s, Algo::Mem)
}

/// One generalized step with `Q̃_a = (Σ_i M_ia F_i^-γ)^(-1/γ)`.
/// `gamma == 1` runs the FCM update itself.
pub fn gamma_step(m: &BinaryBipartiteMatrix, s: &ScoreState, gamma: f64) -> Result<ScoreState> {
    one_step(m, s, Algo::Gamma(gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub epsilon: f64,
    pub max_iter: usize,
    pub record_history: bool,
    pub zero_ratio_threshold: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            epsilon: DEFAULT_EPSILON,
            max_iter: DEFAULT_MAX_ITER,
            record_history: false,
            zero_ratio_threshold: DEFAULT_ZERO_RATIO_THRESHOLD,
        }
    }
}

impl RunOptions {
    pub fn with_epsilon(epsilon: f64) -> Self {
        RunOptions {
            epsilon,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub halt_iteration: usize,
    pub final_delta: f64,
    pub epsilon: f64,
    /// Adjacent rows `(lower, higher)` in fitness order whose ratio ended
    /// below the zero-ratio threshold.
    pub zero_ratio_pairs: Vec<(usize, usize)>,
    /// Rows sorted by final fitness, least fit first.
    pub row_order: Vec<usize>,
    /// `F[row_order[k]] / F[row_order[k + 1]]` at halt.
    pub row_ratios: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<f64>>,
}

/// Rows by fitness, then diversification, then index; and adjacent ratios.
pub fn fitness_ratios(fitness: &[f64], degrees: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| {
        fitness[a]
            .total_cmp(&fitness[b])
            .then(degrees[a].cmp(&degrees[b]))
            .then(a.cmp(&b))
    });
    let ratios = order
        .windows(2)
        .map(|w| fitness[w[0]] / fitness[w[1]])
        .collect();
    (order, ratios)
}

/// Iterates until the ratio criterion drops below `epsilon` or `max_iter`
/// steps have run. Hitting `max_iter` is not an error: the report says
/// `converged: false` and the last state is returned.
pub fn run(
    m: &BinaryBipartiteMatrix,
    algo: Algo,
    opts: &RunOptions,
) -> Result<(ScoreState, ConvergenceReport)> {
    opts.check()?;
    let mut st = Stepper::from_state(m, algo, ScoreState::initial(m))?;
    let degrees = m.row_degrees();
    let (mut order, mut ratios) = fitness_ratios(&st.state().fitness, degrees);
    let mut history = opts.record_history.then(Vec::new);
    let mut converged = false;
    let mut delta = f64::INFINITY;
    for _ in 0..opts.max_iter {
        st.step()?;
        let (o, r) = fitness_ratios(&st.state().fitness, degrees);
        delta = ratios.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum();
        (order, ratios) = (o, r);
        if let Some(h) = history.as_mut() {
            h.push(delta);
        }
        if delta < opts.epsilon {
            converged = true;
            break;
        }
    }
    let state = st.into_state();
    if !converged {
        log::warn!(
            "{algo} did not converge in {} iterations (d = {delta:e})",
            opts.max_iter
        );
    }
    let zero_ratio_pairs = order
        .windows(2)
        .zip(&ratios)
        .filter(|(_, &r)| r < opts.zero_ratio_threshold)
        .map(|(w, _)| (w[0], w[1]))
        .collect();
    let report = ConvergenceReport {
        converged,
        halt_iteration: state.iteration,
        final_delta: delta,
        epsilon: opts.epsilon,
        zero_ratio_pairs,
        row_order: order,
        row_ratios: ratios,
        history,
    };
    Ok((state, report))
}
