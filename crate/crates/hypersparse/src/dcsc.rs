//! Doubly compressed sparse column storage.
//!
//! DCSC stores only the nonempty columns: `JC` lists their column indices,
//! `CP` points into `IR`/`NUM` per stored column. Array lengths are `nzc+1`,
//! `nzc`, `nnz`, `nnz` — the footprint never depends on the matrix dimension,
//! which is what makes the 2D-decomposed local blocks affordable. CSC is a
//! dense array of sparse columns; DCSC is a sparse array of sparse columns.
//!
//! The optional `AUX` index buckets `JC` by fixed-width column chunks so a
//! column lookup need not binary-search the whole of `JC`. It is built on
//! demand in linear time; the multiplication kernel never needs it, column
//! slicing profits from it.

use crate::csc::CscMatrix;
use crate::error::{Error, Result};
use crate::triples::TripleList;

/// Chunked lookup index over `JC`.
#[derive(Debug, Clone)]
pub struct AuxIndex {
    /// Columns covered per chunk.
    chunk: usize,
    /// `starts[t]` = first position in `JC` whose column is `>= t * chunk`;
    /// one trailing entry equal to `nzc`.
    starts: Vec<usize>,
}

impl AuxIndex {
    fn build(jc: &[usize], cols: usize) -> Self {
        let nzc = jc.len().max(1);
        let chunk = (cols / nzc).max(1);
        let nchunks = cols.div_ceil(chunk);
        let mut starts = Vec::with_capacity(nchunks + 1);
        let mut pos = 0;
        for t in 0..=nchunks {
            let boundary = t * chunk;
            while pos < jc.len() && jc[pos] < boundary {
                pos += 1;
            }
            starts.push(pos);
        }
        AuxIndex { chunk, starts }
    }

    /// Position of the first `JC` entry `>= col`, probing only within one
    /// chunk. Returns the position and the number of probes spent.
    fn lower_bound(&self, jc: &[usize], col: usize) -> (usize, usize) {
        let t = (col / self.chunk).min(self.starts.len() - 2);
        let mut pos = self.starts[t];
        let end = self.starts[t + 1];
        let mut probes = 0;
        while pos < end && jc[pos] < col {
            pos += 1;
            probes += 1;
        }
        (pos, probes)
    }

    pub fn words(&self) -> usize {
        self.starts.len() + 1
    }
}

/// Cost counter for [`DcscMatrix::column_range_instrumented`]: establishes the
/// slice cost observably rather than by wall clock.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SliceCost {
    /// `JC` positions examined to locate and walk the window.
    pub probes: usize,
    /// Entries copied into the output.
    pub copied: usize,
}

/// An m-by-n sparse matrix storing only its nonempty columns.
#[derive(Debug, Clone)]
pub struct DcscMatrix<T> {
    rows: usize,
    cols: usize,
    jc: Vec<usize>,
    cp: Vec<usize>,
    ir: Vec<usize>,
    num: Vec<T>,
    aux: Option<AuxIndex>,
}

/// Equality ignores the optional acceleration index.
impl<T: PartialEq> PartialEq for DcscMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.jc == other.jc
            && self.cp == other.cp
            && self.ir == other.ir
            && self.num == other.num
    }
}

impl<T: Copy + PartialEq + std::fmt::Debug> DcscMatrix<T> {
    pub fn empty(rows: usize, cols: usize) -> Self {
        DcscMatrix {
            rows,
            cols,
            jc: Vec::new(),
            cp: vec![0],
            ir: Vec::new(),
            num: Vec::new(),
            aux: None,
        }
    }

    /// Compresses the column pointer array of a CSC matrix: only nonempty
    /// columns are kept, with their indices recorded in `JC`.
    pub fn from_csc(a: &CscMatrix<T>) -> Self {
        let mut jc = Vec::new();
        let mut cp = vec![0];
        for j in 0..a.cols() {
            let (s, e) = (a.cp()[j], a.cp()[j + 1]);
            if e > s {
                jc.push(j);
                cp.push(e);
            }
        }
        DcscMatrix {
            rows: a.rows(),
            cols: a.cols(),
            jc,
            cp,
            ir: a.ir().to_vec(),
            num: a.num().to_vec(),
            aux: None,
        }
    }

    /// Exact inverse of [`from_csc`](Self::from_csc).
    pub fn to_csc(&self) -> CscMatrix<T> {
        let mut cp = vec![0usize; self.cols + 1];
        for (k, &j) in self.jc.iter().enumerate() {
            cp[j + 1] = self.cp[k + 1] - self.cp[k];
        }
        for j in 0..self.cols {
            cp[j + 1] += cp[j];
        }
        CscMatrix::from_parts(self.rows, self.cols, cp, self.ir.clone(), self.num.clone())
    }

    /// Builds from entries already sorted by `(col, row)`, duplicate-free and
    /// zero-free. This is the fast path used by kernels whose outputs are
    /// produced in column-major order.
    pub fn from_sorted_entries<I>(rows: usize, cols: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut jc: Vec<usize> = Vec::new();
        let mut cp = vec![0usize];
        let mut ir = Vec::new();
        let mut num = Vec::new();
        for (r, c, v) in entries {
            debug_assert!(r < rows && c < cols);
            match jc.last() {
                Some(&last) if last == c => {}
                Some(&last) => {
                    debug_assert!(last < c, "entries not sorted by column");
                    jc.push(c);
                    cp.push(ir.len());
                }
                None => {
                    jc.push(c);
                    cp.push(ir.len());
                }
            }
            debug_assert!(
                *cp.last().unwrap() == ir.len() || *ir.last().unwrap() < r,
                "entries not strictly increasing within a column"
            );
            ir.push(r);
            num.push(v);
            *cp.last_mut().unwrap() = ir.len();
        }
        DcscMatrix { rows, cols, jc, cp, ir, num, aux: None }
    }

    /// Builds the `AUX` column lookup index (linear time).
    pub fn with_aux(mut self) -> Self {
        self.aux = Some(AuxIndex::build(&self.jc, self.cols));
        self
    }

    pub fn has_aux(&self) -> bool {
        self.aux.is_some()
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

    /// Number of nonempty columns.
    pub fn nzc(&self) -> usize {
        self.jc.len()
    }

    pub fn jc(&self) -> &[usize] {
        &self.jc
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

    /// Row indices and values of the `k`th stored (nonempty) column.
    pub fn stored_col(&self, k: usize) -> (&[usize], &[T]) {
        let (s, e) = (self.cp[k], self.cp[k + 1]);
        (&self.ir[s..e], &self.num[s..e])
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.jc.len()).flat_map(move |k| {
            let j = self.jc[k];
            let (rows, vals) = self.stored_col(k);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, j, v))
        })
    }

    pub fn to_triples(&self) -> TripleList<T> {
        TripleList::from_entries(self.rows, self.cols, self.iter_entries().collect())
            .expect("canonical matrix entries are in range")
    }

    /// Words held in `JC`, `CP`, `IR`, `NUM` — excludes the optional `AUX`.
    pub fn storage_words(&self) -> usize {
        self.jc.len() + self.cp.len() + self.ir.len() + self.num.len()
    }

    pub fn aux_words(&self) -> usize {
        self.aux.as_ref().map_or(0, AuxIndex::words)
    }

    /// Transpose. Output is canonical DCSC; no dimension-length scratch is
    /// allocated (entries are resorted, costing O(nnz log nnz)).
    pub fn transpose(&self) -> Self {
        let mut entries: Vec<(usize, usize, T)> = self
            .iter_entries()
            .map(|(r, c, v)| (c, r, v)) // swapped
            .collect();
        entries.sort_unstable_by_key(|&(r, c, _)| (c, r));
        DcscMatrix::from_sorted_entries(self.cols, self.rows, entries)
    }

    /// Submatrix of columns `lo..hi`, column indices rebased to zero.
    pub fn column_range(&self, lo: usize, hi: usize) -> Result<Self> {
        self.column_range_instrumented(lo, hi).map(|(m, _)| m)
    }

    /// As [`column_range`](Self::column_range), also reporting the work done:
    /// O(hi - lo) probes plus one per copied entry, per the DCSC fetch cost of
    /// `b` consecutive columns being `b` plus the output size.
    pub fn column_range_instrumented(&self, lo: usize, hi: usize) -> Result<(Self, SliceCost)> {
        if lo > hi || hi > self.cols {
            return Err(Error::ColumnRangeOutOfBounds { lo, hi, cols: self.cols });
        }
        let mut cost = SliceCost::default();
        let start = match &self.aux {
            Some(aux) => {
                let (pos, probes) = aux.lower_bound(&self.jc, lo);
                cost.probes += probes + 1;
                pos
            }
            None => {
                let pos = self.jc.partition_point(|&j| j < lo);
                // partition_point is a binary search: lg(nzc) probes.
                cost.probes += usize::BITS as usize - self.jc.len().leading_zeros() as usize + 1;
                pos
            }
        };
        let mut jc = Vec::new();
        let mut cp = vec![0usize];
        let mut ir = Vec::new();
        let mut num = Vec::new();
        let mut k = start;
        while k < self.jc.len() && self.jc[k] < hi {
            cost.probes += 1;
            jc.push(self.jc[k] - lo);
            let (rs, vs) = self.stored_col(k);
            ir.extend_from_slice(rs);
            num.extend_from_slice(vs);
            cost.copied += rs.len();
            cp.push(ir.len());
            k += 1;
        }
        let out = DcscMatrix {
            rows: self.rows,
            cols: hi - lo,
            jc,
            cp,
            ir,
            num,
            aux: None,
        };
        Ok((out, cost))
    }

    /// Structural invariant check for tests.
    pub fn validate(&self) -> Result<()> {
        if self.cp.len() != self.jc.len() + 1 || self.cp[0] != 0 || *self.cp.last().unwrap() != self.ir.len() {
            return Err(Error::InvalidArgument("malformed DCSC pointer array".into()));
        }
        if self.ir.len() != self.num.len() {
            return Err(Error::InvalidArgument("index/value length mismatch".into()));
        }
        for w in self.jc.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidArgument("JC not strictly increasing".into()));
            }
        }
        if let Some(&last) = self.jc.last() {
            if last >= self.cols {
                return Err(Error::InvalidArgument("JC exceeds column count".into()));
            }
        }
        for k in 0..self.jc.len() {
            if self.cp[k] >= self.cp[k + 1] {
                return Err(Error::InvalidArgument(format!("stored column {k} is empty")));
            }
            let (rows, _) = self.stored_col(k);
            for w in rows.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidArgument(format!(
                        "row indices not strictly increasing in stored column {k}"
                    )));
                }
            }
            if *rows.last().unwrap() >= self.rows {
                return Err(Error::IndexOutOfBounds {
                    row: *rows.last().unwrap(),
                    col: self.jc[k],
                    rows: self.rows,
                    cols: self.cols,
                });
            }
        }
        Ok(())
    }
}
