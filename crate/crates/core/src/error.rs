use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty column or dataset")]
    Empty,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid column: {0}")]
    InvalidColumn(String),

    #[error("outcome is constant; selection is meaningless")]
    DegenerateOutcome,

    #[error("degenerate table: effective cardinalities {rows}x{cols}, need at least 2x2")]
    DegenerateTable { rows: usize, cols: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("column not found: {0}")]
    MissingColumn(String),

    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("all rows dropped by missing-value policy")]
    AllRowsDropped,

    #[error("all values missing in column {0}")]
    AllMissing(String),

    #[error("unknown method: {0}")]
    UnknownMethod(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
