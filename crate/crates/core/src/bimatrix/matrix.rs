use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Immutable binary N x M matrix stored in both row-major and column-major
/// compressed form.
///
/// Every row and column has at least one link. Row and column supports are
/// sorted, so iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryBipartiteMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    row_degrees: Vec<usize>,
    col_degrees: Vec<usize>,
}

/// Maps indices of a stripped matrix back to the indices given at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Remap {
    /// `rows[new] = old`
    pub rows: Vec<usize>,
    /// `cols[new] = old`
    pub cols: Vec<usize>,
}

impl Remap {
    pub fn identity(n_rows: usize, n_cols: usize) -> Self {
        Remap {
            rows: (0..n_rows).collect(),
            cols: (0..n_cols).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &r)| i == r)
            && self.cols.iter().enumerate().all(|(i, &c)| i == c)
    }
}

impl BinaryBipartiteMatrix {
    /// Builds a matrix from `(row, col)` pairs. Duplicates are merged.
    ///
    /// With `strip_empty`, rows and columns without links are dropped and the
    /// returned [`Remap`] records the surviving original indices. Without it,
    /// a zero-degree line is an error.
    pub fn from_edge_list(
        pairs: &[(usize, usize)],
        n_rows: usize,
        n_cols: usize,
        strip_empty: bool,
    ) -> Result<(Self, Remap)> {
        for &(row, col) in pairs {
            if row >= n_rows || col >= n_cols {
                return Err(Error::IndexOutOfRange {
                    row,
                    col,
                    n_rows,
                    n_cols,
                });
            }
        }
        let mut pairs = pairs.to_vec();
        pairs.sort_unstable();
        pairs.dedup();

        let mut row_seen = vec![false; n_rows];
        let mut col_seen = vec![false; n_cols];
        for &(r, c) in &pairs {
            row_seen[r] = true;
            col_seen[c] = true;
        }
        if !strip_empty {
            if let Some(i) = row_seen.iter().position(|s| !s) {
                return Err(Error::ZeroDegree {
                    what: "row",
                    index: i,
                });
            }
            if let Some(i) = col_seen.iter().position(|s| !s) {
                return Err(Error::ZeroDegree {
                    what: "column",
                    index: i,
                });
            }
        }
        let rows: Vec<usize> = (0..n_rows).filter(|&i| row_seen[i]).collect();
        let cols: Vec<usize> = (0..n_cols).filter(|&i| col_seen[i]).collect();
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let mut row_new = vec![usize::MAX; n_rows];
        for (new, &old) in rows.iter().enumerate() {
            row_new[old] = new;
        }
        let mut col_new = vec![u32::MAX; n_cols];
        for (new, &old) in cols.iter().enumerate() {
            col_new[old] = new as u32;
        }
        // Remapping is monotone, so the links stay sorted row-major.
        let mut row_ptr = vec![0usize; rows.len() + 1];
        for &(r, _) in &pairs {
            row_ptr[row_new[r] + 1] += 1;
        }
        for k in 0..rows.len() {
            row_ptr[k + 1] += row_ptr[k];
        }
        let col_idx: Vec<u32> = pairs.iter().map(|&(_, c)| col_new[c]).collect();
        drop(pairs);
        let m = Self::from_csr_parts(cols.len(), row_ptr, col_idx);
        Ok((m, Remap { rows, cols }))
    }

    /// Builds a matrix from a dense 0/1 table. Any nonzero entry is a link.
    /// Zero-degree lines are rejected.
    pub fn from_dense<T: Copy + Default + PartialEq>(rows: &[Vec<T>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut pairs = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != T::default() {
                    pairs.push((i, j));
                }
            }
        }
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        Self::from_edge_list(&pairs, n_rows, n_cols, false).map(|(m, _)| m)
    }

    /// Assembles a matrix from row pointers and sorted, duplicate-free
    /// column indices. Every row and column must be non-empty.
    pub(crate) fn from_csr_parts(n_cols: usize, row_ptr: Vec<usize>, col_idx: Vec<u32>) -> Self {
        let n_rows = row_ptr.len() - 1;
        let row_degrees: Vec<usize> = row_ptr.windows(2).map(|w| w[1] - w[0]).collect();
        let mut col_degrees = vec![0usize; n_cols];
        for &c in &col_idx {
            col_degrees[c as usize] += 1;
        }
        debug_assert!(row_degrees.iter().chain(&col_degrees).all(|&d| d > 0));
        let col_ptr = prefix_sums(&col_degrees);
        let mut row_idx = vec![0u32; col_idx.len()];
        let mut fill = col_ptr.clone();
        // Row-major traversal keeps each column's row list sorted.
        for i in 0..n_rows {
            for &c in &col_idx[row_ptr[i]..row_ptr[i + 1]] {
                row_idx[fill[c as usize]] = i as u32;
                fill[c as usize] += 1;
            }
        }
        BinaryBipartiteMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            col_ptr,
            row_idx,
            row_degrees,
            col_degrees,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of links.
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Diversification `D_i` of every row.
    pub fn row_degrees(&self) -> &[usize] {
        &self.row_degrees
    }

    /// Ubiquity `U_a` of every column.
    pub fn col_degrees(&self) -> &[usize] {
        &self.col_degrees
    }

    /// Sorted column indices of row `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Sorted row indices of column `a`.
    pub fn col(&self, a: usize) -> &[u32] {
        &self.row_idx[self.col_ptr[a]..self.col_ptr[a + 1]]
    }

    pub fn contains(&self, i: usize, a: usize) -> bool {
        i < self.n_rows && self.row(i).binary_search(&(a as u32)).is_ok()
    }

    /// All links in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).iter().map(move |&c| (i, c as usize)))
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut out = vec![vec![0u8; self.n_cols]; self.n_rows];
        for (i, a) in self.pairs() {
            out[i][a] = 1;
        }
        out
    }

    /// Reorders the matrix so that new row `k` is old row `row_order[k]`
    /// and likewise for columns.
    pub fn permute(&self, row_order: &[usize], col_order: &[usize]) -> Result<Self> {
        check_permutation(row_order, self.n_rows)?;
        check_permutation(col_order, self.n_cols)?;
        let mut row_pos = vec![0usize; self.n_rows];
        for (k, &r) in row_order.iter().enumerate() {
            row_pos[r] = k;
        }
        let mut col_pos = vec![0u32; self.n_cols];
        for (k, &c) in col_order.iter().enumerate() {
            col_pos[c] = k as u32;
        }
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz());
        row_ptr.push(0);
        for &r in row_order {
            let start = col_idx.len();
            col_idx.extend(self.row(r).iter().map(|&a| col_pos[a as usize]));
            col_idx[start..].sort_unstable();
            row_ptr.push(col_idx.len());
        }
        Ok(Self::from_csr_parts(self.n_cols, row_ptr, col_idx))
    }
}

fn prefix_sums(counts: &[usize]) -> Vec<usize> {
    let mut ptr = Vec::with_capacity(counts.len() + 1);
    let mut acc = 0;
    ptr.push(0);
    for &c in counts {
        acc += c;
        ptr.push(acc);
    }
    ptr
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: order.len(),
        });
    }
    let mut seen = vec![false; n];
    for &k in order {
        if k >= n || seen[k] {
            return Err(Error::InvalidParameter(format!(
                "order is not a permutation of 0..{n}"
            )));
        }
        seen[k] = true;
    }
    Ok(())
}
