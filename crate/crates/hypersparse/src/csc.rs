//! Compressed sparse column storage.
//!
//! `CP` has one pointer per column plus one; `IR`/`NUM` hold row indices and
//! values in column-major order, strictly increasing within each column. The
//! format is canonical: no duplicates, no stored zeros.

use crate::error::{Error, Result};
use crate::semiring::Semiring;
use crate::triples::TripleList;

/// An m-by-n sparse matrix in compressed sparse column form.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix<T> {
    rows: usize,
    cols: usize,
    cp: Vec<usize>,
    ir: Vec<usize>,
    num: Vec<T>,
}

impl<T: Copy + PartialEq + std::fmt::Debug> CscMatrix<T> {
    pub fn empty(rows: usize, cols: usize) -> Self {
        CscMatrix {
            rows,
            cols,
            cp: vec![0; cols + 1],
            ir: Vec::new(),
            num: Vec::new(),
        }
    }

    /// Canonicalizes a triple list: duplicates are combined with the semiring
    /// `add` in their original list order, and entries equal to the semiring
    /// zero are dropped.
    pub fn from_triples<S>(t: &TripleList<T>, sr: &S) -> Result<Self>
    where
        S: Semiring<Elem = T>,
    {
        Self::from_raw_entries(t.rows(), t.cols(), t.entries().to_vec(), sr)
    }

    /// Same as [`from_triples`](Self::from_triples) but takes ownership of the
    /// entry vector; indices are bounds-checked.
    pub fn from_raw_entries<S>(
        rows: usize,
        cols: usize,
        mut entries: Vec<(usize, usize, T)>,
        sr: &S,
    ) -> Result<Self>
    where
        S: Semiring<Elem = T>,
    {
        for &(r, c, _) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::IndexOutOfBounds { row: r, col: c, rows, cols });
            }
        }
        // Stable sort keeps duplicates in insertion order, which fixes the
        // accumulation order for non-associative floating point adds.
        entries.sort_by_key(|&(r, c, _)| (c, r));

        let mut cp = vec![0usize; cols + 1];
        let mut ir = Vec::with_capacity(entries.len());
        let mut num: Vec<T> = Vec::with_capacity(entries.len());

        let mut i = 0;
        while i < entries.len() {
            let (r, c, mut v) = entries[i];
            let mut j = i + 1;
            while j < entries.len() && entries[j].0 == r && entries[j].1 == c {
                v = sr.add(v, entries[j].2);
                j += 1;
            }
            if !sr.is_zero(v) {
                ir.push(r);
                num.push(v);
                cp[c + 1] += 1;
            }
            i = j;
        }
        for c in 0..cols {
            cp[c + 1] += cp[c];
        }
        Ok(CscMatrix { rows, cols, cp, ir, num })
    }

    /// Identity matrix with `one` on the diagonal.
    pub fn identity<S>(n: usize, sr: &S) -> Self
    where
        S: Semiring<Elem = T>,
    {
        CscMatrix {
            rows: n,
            cols: n,
            cp: (0..=n).collect(),
            ir: (0..n).collect(),
            num: vec![sr.one(); n],
        }
    }

    /// Builds directly from canonical parts. Used by conversions that already
    /// guarantee sorted, duplicate-free, zero-free columns.
    pub(crate) fn from_parts(rows: usize, cols: usize, cp: Vec<usize>, ir: Vec<usize>, num: Vec<T>) -> Self {
        debug_assert_eq!(cp.len(), cols + 1);
        debug_assert_eq!(*cp.last().unwrap(), ir.len());
        debug_assert_eq!(ir.len(), num.len());
        CscMatrix { rows, cols, cp, ir, num }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.ir.len()
    }

    pub fn cp(&self) -> &[usize] {
        &self.cp
    }

    pub fn ir(&self) -> &[usize] {
        &self.ir
    }

    pub fn num(&self) -> &[T] {
        &self.num
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[T]) {
        let (s, e) = (self.cp[j], self.cp[j + 1]);
        (&self.ir[s..e], &self.num[s..e])
    }

    /// Entries in column-major order.
    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.cols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, j, v))
        })
    }

    pub fn to_triples(&self) -> TripleList<T> {
        TripleList::from_entries(self.rows, self.cols, self.iter_entries().collect())
            .expect("canonical matrix entries are in range")
    }

    /// Total words held in the index and value arrays.
    pub fn storage_words(&self) -> usize {
        self.cp.len() + self.ir.len() + self.num.len()
    }

    /// Structural invariant check, used by tests and the file reader.
    pub fn validate<S>(&self, sr: &S) -> Result<()>
    where
        S: Semiring<Elem = T>,
    {
        if self.cp.len() != self.cols + 1 || self.cp[0] != 0 || *self.cp.last().unwrap() != self.ir.len() {
            return Err(Error::InvalidArgument("malformed column pointer array".into()));
        }
        if self.ir.len() != self.num.len() {
            return Err(Error::InvalidArgument("index/value length mismatch".into()));
        }
        for j in 0..self.cols {
            if self.cp[j] > self.cp[j + 1] {
                return Err(Error::InvalidArgument(format!("CP decreases at column {j}")));
            }
            let (rows, vals) = self.col(j);
            for w in rows.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidArgument(format!(
                        "row indices not strictly increasing in column {j}"
                    )));
                }
            }
            for (&r, &v) in rows.iter().zip(vals) {
                if r >= self.rows {
                    return Err(Error::IndexOutOfBounds {
                        row: r,
                        col: j,
                        rows: self.rows,
                        cols: self.cols,
                    });
                }
                if sr.is_zero(v) {
                    return Err(Error::InvalidArgument(format!("stored zero at ({r}, {j})")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::PlusTimes;

    /// The 9x9, 4-entry worked example; entries listed 1-based as
    /// {(6,1,.1),(8,1,.2),(4,7,.3),(2,8,.4)}, stored 0-based.
    pub(crate) fn nine_by_nine() -> CscMatrix<f64> {
        let t = TripleList::from_entries(
            9,
            9,
            vec![(5, 0, 0.1), (7, 0, 0.2), (3, 6, 0.3), (1, 7, 0.4)],
        )
        .unwrap();
        CscMatrix::from_triples(&t, &PlusTimes).unwrap()
    }

    #[test]
    fn worked_example_csc_arrays() {
        let a = nine_by_nine();
        // 1-based display form: CP = [1,3,3,3,3,3,3,4,5,5], IR = [6,8,4,2].
        let cp_display: Vec<usize> = a.cp().iter().map(|&p| p + 1).collect();
        assert_eq!(cp_display, vec![1, 3, 3, 3, 3, 3, 3, 4, 5, 5]);
        let ir_display: Vec<usize> = a.ir().iter().map(|&r| r + 1).collect();
        assert_eq!(ir_display, vec![6, 8, 4, 2]);
        assert_eq!(a.num(), &[0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn empty_entry_list() {
        let t = TripleList::<f64>::new(3, 3);
        let a = CscMatrix::from_triples(&t, &PlusTimes).unwrap();
        assert_eq!(a.cp(), &[0, 0, 0, 0]);
        assert!(a.ir().is_empty());
        assert!(a.num().is_empty());
    }

    #[test]
    fn duplicates_combine_and_cancel() {
        let t = TripleList::from_entries(1, 1, vec![(0, 0, 2.0), (0, 0, 3.0)]).unwrap();
        let a = CscMatrix::from_triples(&t, &PlusTimes).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.num(), &[5.0]);

        let t = TripleList::from_entries(1, 1, vec![(0, 0, 2.0), (0, 0, -2.0)]).unwrap();
        let a = CscMatrix::from_triples(&t, &PlusTimes).unwrap();
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn out_of_range_rejected() {
        let t = TripleList::from_entries(2, 2, vec![(2, 0, 1.0)]);
        assert!(t.is_err());
        let mut t = TripleList::new(2, 2);
        assert!(t.push(0, 5, 1.0).is_err());
    }

    #[test]
    fn canonicalization_idempotent() {
        let a = nine_by_nine();
        let b = CscMatrix::from_triples(&a.to_triples(), &PlusTimes).unwrap();
        assert_eq!(a, b);
    }
}
