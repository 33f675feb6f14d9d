//! Dataset ingestion and preprocessing: delimited text, missing values,
//! numeric binning and sample-coverage diagnostics.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::estimators::sample_coverage;
use crate::tabulate::{tabulate, CategoricalColumn};
use crate::{Error, Result};

/// Label given to missing values under [`NaPolicy::NaCategory`].
pub const NA_LABEL: &str = "NA";

/// Coverage below which a column is flagged.
pub const LOW_COVERAGE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NaPolicy {
    /// Missing values become their own category.
    #[default]
    NaCategory,
    /// Rows with a missing value in any column are removed.
    DropRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinningMethod {
    #[default]
    EqualFrequency,
    EqualWidth,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub delimiter: u8,
    pub na_tokens: Vec<String>,
    pub na_policy: NaPolicy,
    pub binning: BinningMethod,
    pub bins: usize,
    /// Reduce the bin count of numeric columns until coverage reaches 0.5.
    pub auto_bins: bool,
    /// Columns kept categorical even if every value parses as a number.
    pub as_categorical: Vec<String>,
    /// Keep every column categorical.
    pub all_categorical: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            na_tokens: vec!["NA".into(), String::new()],
            na_policy: NaPolicy::default(),
            binning: BinningMethod::default(),
            bins: 5,
            auto_bins: false,
            as_categorical: Vec::new(),
            all_categorical: false,
        }
    }
}

/// Equal-length named categorical columns, optionally with a designated outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<CategoricalColumn>,
    outcome: Option<String>,
}

impl Dataset {
    pub fn new(columns: Vec<CategoricalColumn>, outcome: Option<String>) -> Result<Self> {
        let first = columns.first().ok_or(Error::Empty)?;
        let mut names = HashSet::new();
        for c in &columns {
            if c.len() != first.len() {
                return Err(Error::LengthMismatch {
                    left: first.len(),
                    right: c.len(),
                });
            }
            if !names.insert(c.name()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate column name {}",
                    c.name()
                )));
            }
        }
        if let Some(o) = &outcome {
            if !names.contains(o.as_str()) {
                return Err(Error::MissingColumn(o.clone()));
            }
        }
        Ok(Self { columns, outcome })
    }

    pub fn columns(&self) -> &[CategoricalColumn] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn column(&self, name: &str) -> Option<&CategoricalColumn> {
        self.columns.iter().find(|c| c.name() == name)
    }

    pub fn outcome_name(&self) -> Option<&str> {
        self.outcome.as_deref()
    }

    pub fn outcome(&self) -> Result<&CategoricalColumn> {
        let name = self
            .outcome
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("dataset has no outcome column".into()))?;
        self.column(name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    }

    /// Every column other than the outcome, in column order.
    pub fn features(&self) -> Vec<CategoricalColumn> {
        self.columns
            .iter()
            .filter(|c| Some(c.name()) != self.outcome.as_deref())
            .cloned()
            .collect()
    }

    /// Adds a column at the end.
    pub fn with_column(mut self, column: CategoricalColumn) -> Result<Self> {
        self.columns.push(column);
        Self::new(self.columns, self.outcome)
    }
}

/// Reads delimited text with a header row.
pub fn ingest(
    reader: impl Read,
    outcome: Option<&str>,
    options: &IngestOptions,
) -> Result<Dataset> {
    if options.bins < 2 {
        return Err(Error::InvalidArgument("bins must be at least 2".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Empty);
    }
    if header.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two columns (features and an outcome)".into(),
        ));
    }
    if let Some(o) = outcome {
        if !header.iter().any(|h| h == o) {
            return Err(Error::MissingColumn(o.to_owned()));
        }
    }

    let is_na = |s: &str| options.na_tokens.iter().any(|t| t == s);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut seen = 0usize;
    for (i, record) in rdr.records().enumerate() {
        seen += 1;
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: i + 1,
                expected: header.len(),
                found: record.len(),
            });
        }
        let row: Vec<String> = record.iter().map(str::to_owned).collect();
        if options.na_policy == NaPolicy::DropRow && row.iter().any(|v| is_na(v)) {
            continue;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(if seen > 0 {
            Error::AllRowsDropped
        } else {
            Error::Empty
        });
    }

    let mut columns = Vec::with_capacity(header.len());
    for (j, name) in header.iter().enumerate() {
        let cells: Vec<&str> = rows.iter().map(|r| r[j].as_str()).collect();
        let forced = options.all_categorical || options.as_categorical.iter().any(|c| c == name);
        let numeric = if forced {
            None
        } else {
            parse_numeric(&cells, is_na)
        };
        let column = match numeric {
            Some(values) if options.auto_bins => {
                auto_bin(name, &values, options.bins, LOW_COVERAGE)?
            }
            Some(values) => bin_numeric(name, &values, options.binning, options.bins)?,
            None => CategoricalColumn::from_labels(
                name.clone(),
                cells.iter().map(|&c| if is_na(c) { NA_LABEL } else { c }),
            )?,
        };
        columns.push(column);
    }
    Dataset::new(columns, outcome.map(str::to_owned))
}

pub fn ingest_path(
    path: impl AsRef<Path>,
    outcome: Option<&str>,
    options: &IngestOptions,
) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    ingest(std::io::BufReader::new(file), outcome, options)
}

/// Writes the dataset's labels as delimited text, columns in order.
pub fn emit(ds: &Dataset, writer: impl Write, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(writer);
    w.write_record(ds.columns().iter().map(|c| c.name()))?;
    for row in 0..ds.n_rows() {
        w.write_record(ds.columns().iter().map(|c| c.row_label(row)))?;
    }
    w.flush()?;
    Ok(())
}

// `Some` only if every non-missing cell parses and at least one is present.
fn parse_numeric(cells: &[&str], is_na: impl Fn(&str) -> bool) -> Option<Vec<Option<f64>>> {
    let mut any = false;
    let values = cells
        .iter()
        .map(|&c| {
            if is_na(c) {
                Some(None)
            } else {
                any = true;
                c.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Some)
            }
        })
        .collect::<Option<Vec<_>>>()?;
    any.then_some(values)
}

/// Discretizes numeric values into left-closed, right-open intervals (the
/// last one closed). Missing values become the `NA` category.
///
/// Equal-frequency cut points sit at the linearly interpolated empirical
/// quantiles `i / bins`; coinciding cut points are merged, so fewer bins
/// than requested can result.
pub fn bin_numeric(
    name: &str,
    values: &[Option<f64>],
    method: BinningMethod,
    bins: usize,
) -> Result<CategoricalColumn> {
    if bins < 2 {
        return Err(Error::InvalidArgument("bins must be at least 2".into()));
    }
    let mut sorted: Vec<f64> = values.iter().flatten().copied().collect();
    if sorted.is_empty() {
        return Err(Error::AllMissing(name.to_owned()));
    }
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);

    let mut edges: Vec<f64> = match method {
        BinningMethod::EqualWidth => (0..=bins)
            .map(|i| {
                if i == bins {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / bins as f64
                }
            })
            .collect(),
        BinningMethod::EqualFrequency => (0..=bins)
            .map(|i| quantile(&sorted, i as f64 / bins as f64))
            .collect(),
    };
    edges.dedup();

    let labels: Vec<String> = if edges.len() == 1 {
        vec![format!("[{},{}]", edges[0], edges[0])]
    } else {
        let last = edges.len() - 2;
        (0..=last)
            .map(|b| {
                let close = if b == last { ']' } else { ')' };
                format!("[{},{}{close}", edges[b], edges[b + 1])
            })
            .collect()
    };
    let bin_of = |x: f64| -> usize {
        let upper = edges.partition_point(|&e| e <= x);
        upper.saturating_sub(1).min(labels.len() - 1)
    };
    CategoricalColumn::from_labels(
        name,
        values.iter().map(|v| match v {
            Some(x) => labels[bin_of(*x)].as_str(),
            None => NA_LABEL,
        }),
    )
}

// Linear interpolation between order statistics.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let below = h.floor() as usize;
    let above = (below + 1).min(sorted.len() - 1);
    let frac = h - below as f64;
    if frac == 0.0 {
        sorted[below]
    } else {
        sorted[below] + frac * (sorted[above] - sorted[below])
    }
}

/// Equal-frequency binning starting at `start_bins`, halving the bin count
/// until the column's estimated coverage reaches `target_coverage` or two
/// bins remain.
pub fn auto_bin(
    name: &str,
    values: &[Option<f64>],
    start_bins: usize,
    target_coverage: f64,
) -> Result<CategoricalColumn> {
    if start_bins < 2 {
        return Err(Error::InvalidArgument(
            "start bins must be at least 2".into(),
        ));
    }
    let mut bins = start_bins;
    loop {
        let col = bin_numeric(name, values, BinningMethod::EqualFrequency, bins)?;
        if bins == 2 || sample_coverage(&tabulate(&col)) >= target_coverage {
            return Ok(col);
        }
        bins = (bins / 2).max(2);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageFlag {
    LowCoverage,
    IdLike,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageEntry {
    pub name: String,
    pub coverage: f64,
    pub categories: usize,
    pub flag: Option<CoverageFlag>,
}

/// Estimated sample coverage of every non-outcome column.
pub fn coverage_report(ds: &Dataset) -> Vec<CoverageEntry> {
    ds.columns()
        .iter()
        .filter(|c| Some(c.name()) != ds.outcome_name())
        .map(|c| {
            let t = tabulate(c);
            let coverage = sample_coverage(&t);
            let flag = if t.singletons() == t.k_effective() {
                Some(CoverageFlag::IdLike)
            } else if coverage < LOW_COVERAGE {
                Some(CoverageFlag::LowCoverage)
            } else {
                None
            };
            CoverageEntry {
                name: c.name().to_owned(),
                coverage,
                categories: t.k_effective(),
                flag,
            }
        })
        .collect()
}
