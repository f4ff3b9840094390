//! Binary bipartite matrices, perfectly nested profiles and synthetic generators.
//!
//! Rows are countries and columns are products. Indices are 0-based.

mod generators;
mod io;
mod matrix;
mod profile;

pub use generators::{generate_model_a, generate_model_b, DEFAULT_M_RATIO};
pub use io::{format_matrix, parse_matrix, read_matrix, write_matrix};
pub(crate) use matrix::check_permutation;
pub use matrix::{BinaryBipartiteMatrix, Remap};
pub use profile::{canonical_order, extract_profile, is_perfectly_nested, NestedProfile};
