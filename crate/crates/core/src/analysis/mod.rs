//! Experiment harness: rank correlation, packing, robustness to noise,
//! group separation and convergence scaling.

mod groups;
mod packing;
mod perturb;
mod scaling;
mod spearman;

pub use groups::{separate_groups, separate_run_groups, ScoreGroup};
pub use packing::{
    border_violations, pack, packing_from_scores, render_csv, render_pgm, Axis, Packing, TieGroup,
};
pub use perturb::{perturb_and_rank, PerturbationResult, PerturbationStudy, Region};
pub use scaling::{log_fit, scaling_csv, scaling_study, LogFit, ModelSpec, ScalingPoint};
pub use spearman::{average_ranks, spearman};
