//! Nonlinear rankings on nested bipartite networks.
//!
//! The crate computes the fitness-complexity metric (FCM) and the minimal
//! extremal metric (MEM) on binary country-product matrices, gives exact
//! score ratios for perfectly nested matrices, and bundles the experiment
//! harness used to study packing, robustness and convergence speed.
//!
//! ```
//! use nestrank::bimatrix::BinaryBipartiteMatrix;
//! use nestrank::metrics::{run, Algo, RunOptions};
//!
//! let m = BinaryBipartiteMatrix::from_dense(&[vec![1, 1, 0], vec![1, 1, 1]]).unwrap();
//! let (state, report) = run(&m, Algo::Fcm, &RunOptions::default()).unwrap();
//! assert!(report.converged);
//! assert!(state.fitness[0] < state.fitness[1]);
//! ```

pub mod analysis;
pub mod analytic;
pub mod bimatrix;
mod error;
pub mod ingest;
pub mod metrics;

pub use error::{Error, Result};
