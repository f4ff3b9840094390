//! Export tables to binary matrices via revealed comparative advantage.
//!
//! `RCA_ia = (e_ia / Σ_b e_ib) / (Σ_j e_ja / Σ_jb e_jb)` and a link is kept
//! when `RCA_ia > threshold`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bimatrix::BinaryBipartiteMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportRecord {
    pub country: String,
    pub product: String,
    pub year: i64,
    pub value: f64,
}

/// Export volumes with one record per `(country, product, year)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExportTable {
    pub records: Vec<ExportRecord>,
}

/// Column names of the input CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub country: String,
    pub product: String,
    pub year: String,
    pub value: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            country: "country".into(),
            product: "product".into(),
            year: "year".into(),
            value: "value".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadLog {
    pub rows_read: usize,
    pub duplicates_merged: usize,
}

type Key = (String, String, i64);

impl ExportTable {
    /// Builds a table, summing the values of repeated keys.
    pub fn from_records(records: impl IntoIterator<Item = ExportRecord>) -> (Self, usize) {
        let mut merged: BTreeMap<Key, f64> = BTreeMap::new();
        let mut duplicates = 0;
        for r in records {
            match merged.entry((r.country, r.product, r.year)) {
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    *e.get_mut() += r.value;
                    duplicates += 1;
                }
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(r.value);
                }
            }
        }
        let records = merged
            .into_iter()
            .map(|((country, product, year), value)| ExportRecord {
                country,
                product,
                year,
                value,
            })
            .collect();
        (ExportTable { records }, duplicates)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn years(&self) -> BTreeSet<i64> {
        self.records.iter().map(|r| r.year).collect()
    }

    /// Keeps only the listed countries and products. `None` keeps everything.
    pub fn filter(
        &self,
        countries: Option<&BTreeSet<String>>,
        products: Option<&BTreeSet<String>>,
    ) -> ExportTable {
        let keep = |set: Option<&BTreeSet<String>>, id: &str| set.is_none_or(|s| s.contains(id));
        ExportTable {
            records: self
                .records
                .iter()
                .filter(|r| keep(countries, &r.country) && keep(products, &r.product))
                .cloned()
                .collect(),
        }
    }
}

/// Reads a CSV with a header row. Repeated keys are summed.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<(ExportTable, LoadLog)> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(source),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("{other:?}"),
        },
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(csv_err)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let cols = [
        column(&schema.country)?,
        column(&schema.product)?,
        column(&schema.year)?,
        column(&schema.value)?,
    ];
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            }
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let field = |k: usize| row.get(cols[k]).unwrap_or("");
        let year: i64 = field(2)
            .parse()
            .map_err(|_| bad(format!("bad year `{}`", field(2))))?;
        let value: f64 = field(3)
            .parse()
            .map_err(|_| bad(format!("bad value `{}`", field(3))))?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(bad(format!("value must be finite and >= 0, got {value}")));
        }
        if field(0).is_empty() || field(1).is_empty() {
            return Err(bad("empty country or product id".into()));
        }
        records.push(ExportRecord {
            country: field(0).to_string(),
            product: field(1).to_string(),
            year,
            value,
        });
    }
    let rows_read = records.len();
    let (table, duplicates_merged) = ExportTable::from_records(records);
    if duplicates_merged > 0 {
        log::info!(
            "{}: merged {duplicates_merged} duplicate rows",
            path.display()
        );
    }
    Ok((
        table,
        LoadLog {
            rows_read,
            duplicates_merged,
        },
    ))
}

/// Reads one ID per line, ignoring blank lines.
pub fn read_id_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

/// Dense RCA values with row and column labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcaMatrix {
    pub countries: Vec<String>,
    pub products: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl RcaMatrix {
    /// Computes RCA from a dense volume table. Countries and products with
    /// zero total volume are dropped first.
    pub fn from_volumes(
        countries: Vec<String>,
        products: Vec<String>,
        volumes: &[Vec<f64>],
    ) -> Result<Self> {
        if volumes.len() != countries.len() {
            return Err(Error::DimensionMismatch {
                expected: countries.len(),
                got: volumes.len(),
            });
        }
        if let Some(row) = volumes.iter().find(|r| r.len() != products.len()) {
            return Err(Error::DimensionMismatch {
                expected: products.len(),
                got: row.len(),
            });
        }
        let row_tot: Vec<f64> = volumes.iter().map(|r| r.iter().sum()).collect();
        let col_tot: Vec<f64> = (0..products.len())
            .map(|a| volumes.iter().map(|r| r[a]).sum())
            .collect();
        let rows: Vec<usize> = (0..countries.len()).filter(|&i| row_tot[i] > 0.0).collect();
        let cols: Vec<usize> = (0..products.len()).filter(|&a| col_tot[a] > 0.0).collect();
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let total: f64 = rows.iter().map(|&i| row_tot[i]).sum();
        let values = rows
            .iter()
            .map(|&i| {
                cols.iter()
                    .map(|&a| (volumes[i][a] / row_tot[i]) / (col_tot[a] / total))
                    .collect()
            })
            .collect();
        Ok(RcaMatrix {
            countries: rows.iter().map(|&i| countries[i].clone()).collect(),
            products: cols.iter().map(|&a| products[a].clone()).collect(),
            values,
        })
    }
}

/// RCA for one year. Countries and products are sorted by ID.
pub fn rca(t: &ExportTable, year: i64) -> Result<RcaMatrix> {
    let slice: Vec<&ExportRecord> = t.records.iter().filter(|r| r.year == year).collect();
    if slice.is_empty() {
        return Err(Error::EmptyYear(year));
    }
    let countries: Vec<String> = slice
        .iter()
        .map(|r| r.country.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let products: Vec<String> = slice
        .iter()
        .map(|r| r.product.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let c_idx: BTreeMap<&str, usize> = countries
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let p_idx: BTreeMap<&str, usize> = products
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();
    let mut volumes = vec![vec![0.0; products.len()]; countries.len()];
    for r in slice {
        volumes[c_idx[r.country.as_str()]][p_idx[r.product.as_str()]] += r.value;
    }
    RcaMatrix::from_volumes(countries, products, &volumes).map_err(|e| match e {
        Error::EmptyMatrix => Error::EmptyYear(year),
        other => other,
    })
}

/// Row and column IDs of a binarized matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub countries: Vec<String>,
    pub products: Vec<String>,
}

/// Keeps the links with `RCA > threshold`.
pub fn binarize(
    rca: &RcaMatrix,
    threshold: f64,
    strip_empty: bool,
) -> Result<(BinaryBipartiteMatrix, Labels)> {
    let mut pairs = Vec::new();
    for (i, row) in rca.values.iter().enumerate() {
        for (a, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite RCA at ({i}, {a})"
                )));
            }
            if v > threshold {
                pairs.push((i, a));
            }
        }
    }
    let (m, remap) = BinaryBipartiteMatrix::from_edge_list(
        &pairs,
        rca.countries.len(),
        rca.products.len(),
        strip_empty,
    )?;
    let labels = Labels {
        countries: remap
            .rows
            .iter()
            .map(|&i| rca.countries[i].clone())
            .collect(),
        products: remap
            .cols
            .iter()
            .map(|&a| rca.products[a].clone())
            .collect(),
    };
    Ok((m, labels))
}
