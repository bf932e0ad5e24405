//! Coordinate-format entry lists.
//!
//! A `TripleList` is the raw interchange form: an unordered list of
//! `(row, col, value)` entries that may contain duplicates. Canonicalization
//! (sorting, combining duplicates with the semiring `add`, dropping zeros)
//! happens when converting to [`CscMatrix`](crate::csc::CscMatrix).
//!
//! Indices are 0-based everywhere in memory and in files this crate writes,
//! with the single exception of the Matrix Market format, which is 1-based on
//! disk by that standard.

use crate::error::{Error, Result};

/// An m-by-n matrix as a list of `(row, col, value)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleList<T> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Copy> TripleList<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        TripleList {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    /// Builds from a prepared entry list, rejecting out-of-range indices.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<(usize, usize, T)>) -> Result<Self> {
        for &(r, c, _) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::IndexOutOfBounds {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
        }
        Ok(TripleList { rows, cols, entries })
    }

    pub fn push(&mut self, row: usize, col: usize, val: T) -> Result<()> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::IndexOutOfBounds {
                row,
                col,
                rows: self.rows,
                cols: self.cols,
            });
        }
        self.entries.push((row, col, val));
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of raw entries, duplicates included.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, usize, T)> {
        self.entries
    }
}
