use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{pack, spearman, Packing};
use crate::bimatrix::BinaryBipartiteMatrix;
use crate::metrics::{run, Algo, RunOptions};
use crate::{Error, Result};

/// Cells eligible for flipping, defined on the baseline MEM packing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Region {
    Full,
    /// The `floor(N/2)` fittest rows times the `floor(M/2)` least complex columns.
    TopLeft,
    /// The remaining rows times the remaining columns.
    BottomRight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationResult {
    pub algo: Algo,
    pub eta: f64,
    pub seed: u64,
    pub region: Region,
    pub flips: usize,
    pub rho_fitness: f64,
    pub rho_complexity: f64,
    /// Rows and columns left after dropping lines emptied by the flips;
    /// correlations are taken over these.
    pub rows_kept: usize,
    pub cols_kept: usize,
    pub converged: bool,
}

/// Baseline scores and packing shared by many perturbation trials.
#[derive(Debug, Clone)]
pub struct PerturbationStudy<'a> {
    m: &'a BinaryBipartiteMatrix,
    algo: Algo,
    opts: RunOptions,
    reference: Packing,
    fitness: Vec<f64>,
    complexity: Vec<f64>,
}

impl<'a> PerturbationStudy<'a> {
    pub fn new(m: &'a BinaryBipartiteMatrix, algo: Algo, opts: &RunOptions) -> Result<Self> {
        let reference = pack(m, Algo::Mem, opts)?;
        let (state, _) = run(m, algo, opts)?;
        Ok(PerturbationStudy {
            m,
            algo,
            opts: *opts,
            reference,
            fitness: state.fitness,
            complexity: state.complexity,
        })
    }

    pub fn reference(&self) -> &Packing {
        &self.reference
    }

    fn region(&self, region: Region) -> (&[usize], &[usize]) {
        let rows = &self.reference.row_order;
        let cols = &self.reference.col_order;
        let (hr, hc) = (rows.len() / 2, cols.len() / 2);
        match region {
            Region::Full => (rows, cols),
            Region::TopLeft => (&rows[..hr], &cols[..hc]),
            Region::BottomRight => (&rows[hr..], &cols[hc..]),
        }
    }

    /// Flips `floor(eta * cells)` distinct cells of the region and returns
    /// the perturbed matrix with emptied lines removed.
    pub fn perturb(
        &self,
        eta: f64,
        region: Region,
        seed: u64,
    ) -> Result<(BinaryBipartiteMatrix, crate::bimatrix::Remap, usize)> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must lie in (0, 1), got {eta}"
            )));
        }
        let (rows, cols) = self.region(region);
        let cells = rows.len() * cols.len();
        if cells == 0 {
            return Err(Error::InvalidParameter(format!(
                "{region:?} region is empty"
            )));
        }
        let flips = (eta * cells as f64).floor() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked: HashSet<(usize, usize)> = rand::seq::index::sample(&mut rng, cells, flips)
            .into_iter()
            .map(|k| (rows[k / cols.len()], cols[k % cols.len()]))
            .collect();
        let mut pairs: Vec<(usize, usize)> = self
            .m
            .pairs()
            .filter(|cell| !picked.contains(cell))
            .collect();
        pairs.extend(picked.iter().filter(|&&(i, a)| !self.m.contains(i, a)));
        let (pm, remap) =
            BinaryBipartiteMatrix::from_edge_list(&pairs, self.m.n_rows(), self.m.n_cols(), true)?;
        Ok((pm, remap, flips))
    }

    /// One trial: perturb, rescore, correlate with the baseline.
    pub fn trial(&self, eta: f64, region: Region, seed: u64) -> Result<PerturbationResult> {
        let (pm, remap, flips) = self.perturb(eta, region, seed)?;
        let (state, report) = run(&pm, self.algo, &self.opts)?;
        let base_f: Vec<f64> = remap.rows.iter().map(|&i| self.fitness[i]).collect();
        let base_q: Vec<f64> = remap.cols.iter().map(|&a| self.complexity[a]).collect();
        Ok(PerturbationResult {
            algo: self.algo,
            eta,
            seed,
            region,
            flips,
            rho_fitness: spearman(&base_f, &state.fitness)?,
            rho_complexity: spearman(&base_q, &state.complexity)?,
            rows_kept: pm.n_rows(),
            cols_kept: pm.n_cols(),
            converged: report.converged,
        })
    }
}

/// Single perturbation trial; see [`PerturbationStudy`] for repeated trials.
pub fn perturb_and_rank(
    m: &BinaryBipartiteMatrix,
    algo: Algo,
    eta: f64,
    region: Region,
    seed: u64,
    opts: &RunOptions,
) -> Result<PerturbationResult> {
    PerturbationStudy::new(m, algo, opts)?.trial(eta, region, seed)
}
