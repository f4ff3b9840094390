use serde::{Deserialize, Serialize};

use super::BinaryBipartiteMatrix;
use crate::{Error, Result};

/// Group description of a perfectly nested matrix.
///
/// Countries are split into `m` groups of equal diversification. Group `i`
/// (0-based here) has diversification `d[i]` and the first `e[i]` countries,
/// counted from the least diversified, belong to groups `0..=i`. Product
/// group `i` holds the columns `d[i-1]..d[i]` and is exported by every
/// country in groups `i..m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct NestedProfile {
    d: Vec<usize>,
    e: Vec<usize>,
    delta: Vec<usize>,
    epsilon: Vec<usize>,
    big_delta: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    d: Vec<usize>,
    e: Vec<usize>,
}

impl TryFrom<ProfileRepr> for NestedProfile {
    type Error = Error;

    fn try_from(r: ProfileRepr) -> Result<Self> {
        NestedProfile::new(r.d, r.e)
    }
}

impl From<NestedProfile> for ProfileRepr {
    fn from(p: NestedProfile) -> Self {
        ProfileRepr { d: p.d, e: p.e }
    }
}

impl NestedProfile {
    /// Builds a profile from cumulative diversifications `d` and cumulative
    /// country counts `e`, both strictly increasing from at least 1.
    pub fn new(d: Vec<usize>, e: Vec<usize>) -> Result<Self> {
        if d.is_empty() || d.len() != e.len() {
            return Err(Error::InvalidProfile(format!(
                "need equal non-zero lengths, got d={} e={}",
                d.len(),
                e.len()
            )));
        }
        let delta = differences(&d)
            .ok_or_else(|| Error::InvalidProfile("d must be strictly increasing from 1".into()))?;
        let epsilon = differences(&e)
            .ok_or_else(|| Error::InvalidProfile("e must be strictly increasing from 1".into()))?;
        let mut big_delta = Vec::with_capacity(e[e.len() - 1]);
        for (&dl, &ep) in delta.iter().zip(&epsilon) {
            big_delta.push(dl);
            big_delta.extend(std::iter::repeat_n(0, ep - 1));
        }
        Ok(NestedProfile {
            d,
            e,
            delta,
            epsilon,
            big_delta,
        })
    }

    /// Builds a profile from group diversifications and group sizes.
    pub fn from_group_sizes(d: Vec<usize>, epsilon: &[usize]) -> Result<Self> {
        let mut e = Vec::with_capacity(epsilon.len());
        let mut acc = 0;
        for &x in epsilon {
            acc += x;
            e.push(acc);
        }
        Self::new(d, e)
    }

    /// Groups a non-decreasing list of per-country diversifications.
    pub fn from_degrees(degrees: &[usize]) -> Result<Self> {
        if degrees.first().is_some_and(|&x| x == 0) || degrees.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidProfile(
                "degrees must be positive and non-decreasing".into(),
            ));
        }
        let mut d = Vec::new();
        let mut e = Vec::new();
        for (k, &x) in degrees.iter().enumerate() {
            if d.last() == Some(&x) {
                *e.last_mut().unwrap() = k + 1;
            } else {
                d.push(x);
                e.push(k + 1);
            }
        }
        Self::new(d, e)
    }

    /// Builds a profile from per-country increments `D_i - D_{i-1}`.
    /// The first increment must be positive; later zeros merge countries
    /// into one group.
    pub fn from_big_delta(big_delta: &[usize]) -> Result<Self> {
        let degrees: Vec<usize> = big_delta
            .iter()
            .scan(0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        Self::from_degrees(&degrees)
    }

    /// Number of groups `m`.
    pub fn m(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[usize] {
        &self.d
    }

    pub fn e(&self) -> &[usize] {
        &self.e
    }

    /// Group widths `δ_i = d_i - d_{i-1}`.
    pub fn delta(&self) -> &[usize] {
        &self.delta
    }

    /// Group sizes `ε_i = e_i - e_{i-1}`.
    pub fn epsilon(&self) -> &[usize] {
        &self.epsilon
    }

    /// Per-country increments `Δ_i = D_i - D_{i-1}`, zero inside a group.
    pub fn big_delta(&self) -> &[usize] {
        &self.big_delta
    }

    /// Number of countries `N`.
    pub fn n_rows(&self) -> usize {
        self.e[self.e.len() - 1]
    }

    /// Number of products `M`.
    pub fn n_cols(&self) -> usize {
        self.d[self.d.len() - 1]
    }

    /// Per-country diversification in increasing order.
    pub fn degrees(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_rows());
        for (&d, &ep) in self.d.iter().zip(&self.epsilon) {
            out.extend(std::iter::repeat_n(d, ep));
        }
        out
    }

    /// Per-product ubiquity in decreasing order.
    pub fn ubiquities(&self) -> Vec<usize> {
        let n = self.n_rows();
        let mut out = Vec::with_capacity(self.n_cols());
        let mut e_prev = 0;
        for (&dl, &e) in self.delta.iter().zip(&self.e) {
            out.extend(std::iter::repeat_n(n - e_prev, dl));
            e_prev = e;
        }
        out
    }

    /// Group index of every country.
    pub fn country_groups(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_rows());
        for (g, &ep) in self.epsilon.iter().enumerate() {
            out.extend(std::iter::repeat_n(g, ep));
        }
        out
    }

    /// Group index of every product.
    pub fn product_groups(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_cols());
        for (g, &dl) in self.delta.iter().enumerate() {
            out.extend(std::iter::repeat_n(g, dl));
        }
        out
    }

    /// The stepwise matrix described by the profile, rows sorted by
    /// increasing diversification and columns by decreasing ubiquity.
    pub fn to_matrix(&self) -> BinaryBipartiteMatrix {
        let degrees = self.degrees();
        let mut row_ptr = Vec::with_capacity(degrees.len() + 1);
        let mut col_idx = Vec::with_capacity(degrees.iter().sum());
        row_ptr.push(0);
        for &d in &degrees {
            col_idx.extend(0..d as u32);
            row_ptr.push(col_idx.len());
        }
        BinaryBipartiteMatrix::from_csr_parts(self.n_cols(), row_ptr, col_idx)
    }
}

fn differences(v: &[usize]) -> Option<Vec<usize>> {
    let mut prev = 0;
    let mut out = Vec::with_capacity(v.len());
    for &x in v {
        if x <= prev {
            return None;
        }
        out.push(x - prev);
        prev = x;
    }
    Some(out)
}

/// Row and column orders that sort rows by increasing degree and columns by
/// decreasing degree, ties by index. Pass them to
/// [`BinaryBipartiteMatrix::permute`] to obtain the stepwise layout of a
/// perfectly nested matrix.
pub fn canonical_order(m: &BinaryBipartiteMatrix) -> (Vec<usize>, Vec<usize>) {
    let rd = m.row_degrees();
    let cd = m.col_degrees();
    let mut rows: Vec<usize> = (0..m.n_rows()).collect();
    rows.sort_by_key(|&i| (rd[i], i));
    let mut cols: Vec<usize> = (0..m.n_cols()).collect();
    cols.sort_by_key(|&a| (std::cmp::Reverse(cd[a]), a));
    (rows, cols)
}

/// True when every row's support is a prefix of the columns sorted by
/// decreasing ubiquity.
///
/// Columns of equal ubiquity in a nested matrix have identical supports,
/// so the tie order among them does not matter.
pub fn is_perfectly_nested(m: &BinaryBipartiteMatrix) -> bool {
    let (_, cols) = canonical_order(m);
    let mut rank = vec![0usize; m.n_cols()];
    for (k, &a) in cols.iter().enumerate() {
        rank[a] = k;
    }
    (0..m.n_rows()).all(|i| {
        let deg = m.row_degrees()[i];
        m.row(i).iter().all(|&a| rank[a as usize] < deg)
    })
}

/// Groups the countries of a perfectly nested matrix by diversification.
pub fn extract_profile(m: &BinaryBipartiteMatrix) -> Result<NestedProfile> {
    if !is_perfectly_nested(m) {
        return Err(Error::NotPerfectlyNested);
    }
    let mut degrees = m.row_degrees().to_vec();
    degrees.sort_unstable();
    let p = NestedProfile::from_degrees(&degrees)?;
    let mut ubiquities = m.col_degrees().to_vec();
    ubiquities.sort_unstable_by(|a, b| b.cmp(a));
    if p.ubiquities() != ubiquities {
        return Err(Error::NotPerfectlyNested);
    }
    Ok(p)
}

impl BinaryBipartiteMatrix {
    /// Inverse of [`extract_profile`] up to the canonical row and column order.
    pub fn from_profile(p: &NestedProfile) -> Self {
        p.to_matrix()
    }
}
