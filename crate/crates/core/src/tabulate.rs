//! Categorical columns and exact frequency counting.
//!
//! Every column is recoded at construction time to dense integer codes
//! `0..K`, so all estimator kernels downstream work on counts only and never
//! look at labels.

use std::collections::HashMap;

use crate::{Error, Result};

/// A named sequence of dense category codes with a label per code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalColumn {
    name: String,
    codes: Vec<u32>,
    labels: Vec<String>,
}

impl CategoricalColumn {
    /// Builds a column from explicit codes and a code-indexed label list.
    ///
    /// Every label must be used by at least one row and every code must have
    /// a label.
    pub fn new(name: impl Into<String>, codes: Vec<u32>, labels: Vec<String>) -> Result<Self> {
        let name = name.into();
        if codes.is_empty() {
            return Err(Error::Empty);
        }
        let mut used = vec![false; labels.len()];
        for &c in &codes {
            match used.get_mut(c as usize) {
                Some(u) => *u = true,
                None => {
                    return Err(Error::InvalidColumn(format!(
                        "{name}: code {c} has no label"
                    )))
                }
            }
        }
        if let Some(unused) = used.iter().position(|u| !u) {
            return Err(Error::InvalidColumn(format!(
                "{name}: label {unused} ({}) is never used",
                labels[unused]
            )));
        }
        Ok(Self {
            name,
            codes,
            labels,
        })
    }

    /// Encodes a sequence of labels, assigning codes in order of first appearance.
    pub fn from_labels<I, S>(name: impl Into<String>, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut labels = Vec::new();
        let mut codes = Vec::new();
        for v in values {
            let v = v.as_ref();
            let code = match index.get(v) {
                Some(&c) => c,
                None => {
                    let c = labels.len() as u32;
                    index.insert(v.to_owned(), c);
                    labels.push(v.to_owned());
                    c
                }
            };
            codes.push(code);
        }
        Self::new(name, codes, labels)
    }

    /// Builds a column from raw codes that need not be dense; codes are
    /// renumbered by first appearance and labelled with their original value.
    pub fn from_raw_codes(name: impl Into<String>, raw: &[u32]) -> Result<Self> {
        Self::from_labels(name, raw.iter().map(|c| c.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, code: u32) -> &str {
        &self.labels[code as usize]
    }

    /// Label of the category observed in row `row`.
    pub fn row_label(&self, row: usize) -> &str {
        self.label(self.codes[row])
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    /// Always false: a column holds at least one row.
    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Number of distinct categories (every label is used).
    pub fn cardinality(&self) -> usize {
        self.labels.len()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Keeps only the rows whose index is in `keep`, re-densifying codes.
    pub fn select_rows(&self, keep: &[usize]) -> Result<Self> {
        Self::from_labels(self.name.clone(), keep.iter().map(|&r| self.row_label(r)))
    }
}

/// Marginal counts of one categorical variable.
///
/// Entries are `(code, count)` pairs sorted by code; only positive counts are
/// stored, so `k_effective` is the number of entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    entries: Vec<(u32, usize)>,
    n: usize,
}

impl FrequencyTable {
    /// Builds a table from `(code, count)` pairs. Zero counts are dropped and
    /// repeated codes are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, usize)>) -> Result<Self> {
        let mut entries: Vec<(u32, usize)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        entries.sort_unstable_by_key(|&(k, _)| k);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let n = entries.iter().map(|&(_, c)| c).sum();
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Self { entries, n })
    }

    /// Table over codes `0..counts.len()`; zero entries are skipped.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        Self::from_pairs(counts.iter().enumerate().map(|(k, &c)| (k as u32, c)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_effective(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, usize)] {
        &self.entries
    }

    /// The positive counts, in code order.
    pub fn counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(_, c)| c)
    }

    pub fn get(&self, code: u32) -> usize {
        self.entries
            .binary_search_by_key(&code, |&(k, _)| k)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Number of categories observed exactly once.
    pub fn singletons(&self) -> usize {
        self.counts().filter(|&c| c == 1).count()
    }
}

/// Joint counts of a pair of categorical variables with both marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    cells: Vec<((u32, u32), usize)>,
    rows: FrequencyTable,
    cols: FrequencyTable,
}

impl ContingencyTable {
    /// Builds a table from `((row, col), count)` cells; marginals are derived.
    pub fn from_cells(cells: impl IntoIterator<Item = ((u32, u32), usize)>) -> Result<Self> {
        let mut cells: Vec<((u32, u32), usize)> =
            cells.into_iter().filter(|&(_, c)| c > 0).collect();
        cells.sort_unstable_by_key(|&(k, _)| k);
        cells.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let rows = FrequencyTable::from_pairs(cells.iter().map(|&((i, _), c)| (i, c)))?;
        let cols = FrequencyTable::from_pairs(cells.iter().map(|&((_, j), c)| (j, c)))?;
        Ok(Self { cells, rows, cols })
    }

    pub fn cells(&self) -> &[((u32, u32), usize)] {
        &self.cells
    }

    pub fn get(&self, row: u32, col: u32) -> usize {
        self.cells
            .binary_search_by_key(&(row, col), |&(k, _)| k)
            .map(|i| self.cells[i].1)
            .unwrap_or(0)
    }

    pub fn row_marginal(&self) -> &FrequencyTable {
        &self.rows
    }

    pub fn col_marginal(&self) -> &FrequencyTable {
        &self.cols
    }

    pub fn n(&self) -> usize {
        self.rows.n()
    }

    /// The cells flattened into one table over the observed pairs.
    pub fn joint_table(&self) -> FrequencyTable {
        FrequencyTable {
            entries: self
                .cells
                .iter()
                .enumerate()
                .map(|(k, &(_, c))| (k as u32, c))
                .collect(),
            n: self.n(),
        }
    }
}

/// Exact category counts of a column.
pub fn tabulate(col: &CategoricalColumn) -> FrequencyTable {
    let counts = count_codes(col.codes(), col.cardinality());
    FrequencyTable::from_counts(&counts).expect("column is non-empty")
}

/// Joint counts of two equal-length columns.
pub fn cross_tabulate(x: &CategoricalColumn, y: &CategoricalColumn) -> Result<ContingencyTable> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let ky = y.cardinality();
    let mut counts = vec![0usize; x.cardinality() * ky];
    for (&a, &b) in x.codes().iter().zip(y.codes()) {
        counts[a as usize * ky + b as usize] += 1;
    }
    ContingencyTable::from_cells(
        counts
            .iter()
            .enumerate()
            .map(|(idx, &c)| (((idx / ky) as u32, (idx % ky) as u32), c)),
    )
}

/// Joins columns into one column whose categories are the observed tuples.
///
/// Codes are assigned by first appearance in row order. Only observed tuples
/// become categories.
pub fn join_columns(cols: &[&CategoricalColumn]) -> Result<CategoricalColumn> {
    let (first, rest) = cols.split_first().ok_or(Error::Empty)?;
    if rest.is_empty() {
        return Ok((*first).clone());
    }
    for c in rest {
        if c.len() != first.len() {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: c.len(),
            });
        }
    }
    let mut codes = first.codes().to_vec();
    let mut k = first.cardinality();
    for c in rest {
        let (joined, kj) = join_codes(&codes, k, c.codes(), c.cardinality());
        codes = joined;
        k = kj;
    }
    let mut labels = vec![String::new(); k];
    let mut filled = vec![false; k];
    for (row, &code) in codes.iter().enumerate() {
        if !filled[code as usize] {
            filled[code as usize] = true;
            let parts: Vec<&str> = cols.iter().map(|c| c.row_label(row)).collect();
            labels[code as usize] = format!("({})", parts.join(","));
        }
    }
    let name = cols.iter().map(|c| c.name()).collect::<Vec<_>>().join("*");
    CategoricalColumn::new(name, codes, labels)
}

// Above this many potential pairs the pair index falls back to a hash map.
const DENSE_PAIR_LIMIT: usize = 1 << 22;

/// Joins two dense code vectors (cardinalities `ka`, `kb`) into dense codes
/// over the observed pairs, numbered by first appearance. Returns the codes
/// and the number of observed pairs.
pub fn join_codes(a: &[u32], ka: usize, b: &[u32], kb: usize) -> (Vec<u32>, usize) {
    debug_assert_eq!(a.len(), b.len());
    let mut out = Vec::with_capacity(a.len());
    let mut next = 0u32;
    if ka.saturating_mul(kb) <= DENSE_PAIR_LIMIT {
        let mut index = vec![u32::MAX; ka * kb];
        for (&x, &y) in a.iter().zip(b) {
            let slot = &mut index[x as usize * kb + y as usize];
            if *slot == u32::MAX {
                *slot = next;
                next += 1;
            }
            out.push(*slot);
        }
    } else {
        let mut index: HashMap<(u32, u32), u32> = HashMap::new();
        for (&x, &y) in a.iter().zip(b) {
            let code = *index.entry((x, y)).or_insert_with(|| {
                next += 1;
                next - 1
            });
            out.push(code);
        }
    }
    (out, next as usize)
}

/// Multiplicity of each code in `0..k`.
pub fn count_codes(codes: &[u32], k: usize) -> Vec<usize> {
    let mut counts = vec![0usize; k];
    for &c in codes {
        counts[c as usize] += 1;
    }
    counts
}
