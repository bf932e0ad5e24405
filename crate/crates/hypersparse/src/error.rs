use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("entry ({row}, {col}) out of bounds for {rows}x{cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("dimension mismatch: {left} vs {right} ({context})")]
    DimensionMismatch {
        left: String,
        right: String,
        context: &'static str,
    },

    #[error("column range {lo}..{hi} out of bounds for {cols} columns")]
    ColumnRangeOutOfBounds { lo: usize, hi: usize, cols: usize },

    #[error("blocking parameter {b} must divide k/pr = {per_row} and k/pc = {per_col}")]
    InvalidBlocking {
        b: usize,
        per_row: usize,
        per_col: usize,
    },

    #[error("grid {pr}x{pc} does not evenly tile the inner dimension {k}")]
    GridDoesNotTile { pr: usize, pc: usize, k: usize },

    #[error("operation requires a square process grid, got {pr}x{pc}")]
    NonSquareGrid { pr: usize, pc: usize },

    #[error("cost model requires a square process count, got p = {p}")]
    ModelUnsupported { p: usize },

    #[error("duplicate index {index} in {which} vector; assignment targets must be duplicate-free")]
    DuplicateIndex { index: usize, which: &'static str },

    #[error("requested {requested} nonzeros per column exceeds {rows} rows")]
    InfeasibleDensity { requested: usize, rows: usize },

    #[error("restriction order {order} does not divide dimension {n}")]
    OrderDoesNotDivide { order: usize, n: usize },

    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NonSquareMatrix { rows: usize, cols: usize },

    #[error("broadcast root ({root_i}, {root_j}) is not a member of the group")]
    RootNotInGroup { root_i: usize, root_j: usize },

    #[error("rank ({i}, {j}) outside {pr}x{pc} grid")]
    InvalidRank {
        i: usize,
        j: usize,
        pr: usize,
        pc: usize,
    },

    #[error("deadlock: every unfinished rank is waiting; {0}")]
    Deadlock(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(left: impl std::fmt::Display, right: impl std::fmt::Display, context: &'static str) -> Self {
        Error::DimensionMismatch {
            left: left.to_string(),
            right: right.to_string(),
            context,
        }
    }
}
