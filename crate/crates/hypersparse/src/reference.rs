//! Dense reference implementations.
//!
//! Everything here is a deliberately naive triple-loop oracle over a dense
//! `Vec<Vec<T>>`, kept independent of the sparse kernels so tests can check
//! one against the other. Accumulation folds terms in ascending inner-index
//! order, seeding with the first nonzero term, which is the same contraction
//! order the sparse kernels commit to; discrete semirings agree exactly and
//! floating point agrees to rounding.

use crate::csc::CscMatrix;
use crate::dcsc::DcscMatrix;
use crate::semiring::Semiring;

/// Dense matrix as rows of values, including explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<T>>,
}

impl<T: Copy + PartialEq + std::fmt::Debug> Dense<T> {
    pub fn zeros<S: Semiring<Elem = T>>(rows: usize, cols: usize, sr: &S) -> Self {
        Dense {
            rows,
            cols,
            data: vec![vec![sr.zero(); cols]; rows],
        }
    }

    pub fn from_csc<S: Semiring<Elem = T>>(a: &CscMatrix<T>, sr: &S) -> Self {
        let mut d = Self::zeros(a.rows(), a.cols(), sr);
        for (r, c, v) in a.iter_entries() {
            d.data[r][c] = v;
        }
        d
    }

    pub fn from_dcsc<S: Semiring<Elem = T>>(a: &DcscMatrix<T>, sr: &S) -> Self {
        let mut d = Self::zeros(a.rows(), a.cols(), sr);
        for (r, c, v) in a.iter_entries() {
            d.data[r][c] = v;
        }
        d
    }

    /// Back to canonical sparse form (drops zeros).
    pub fn to_csc<S: Semiring<Elem = T>>(&self, sr: &S) -> CscMatrix<T> {
        let mut entries = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if !sr.is_zero(self.data[r][c]) {
                    entries.push((r, c, self.data[r][c]));
                }
            }
        }
        CscMatrix::from_raw_entries(self.rows, self.cols, entries, sr).unwrap()
    }

    pub fn to_dcsc<S: Semiring<Elem = T>>(&self, sr: &S) -> DcscMatrix<T> {
        DcscMatrix::from_csc(&self.to_csc(sr))
    }

    pub fn nnz<S: Semiring<Elem = T>>(&self, sr: &S) -> usize {
        self.data
            .iter()
            .map(|row| row.iter().filter(|&&v| !sr.is_zero(v)).count())
            .sum()
    }

    /// Triple-loop product, skipping zero operands; for each output cell the
    /// surviving terms are folded left-to-right in ascending `k`.
    pub fn matmul<S: Semiring<Elem = T>>(&self, b: &Dense<T>, sr: &S) -> Dense<T> {
        assert_eq!(self.cols, b.rows);
        let mut c = Self::zeros(self.rows, b.cols, sr);
        for i in 0..self.rows {
            for j in 0..b.cols {
                let mut acc: Option<T> = None;
                for k in 0..self.cols {
                    let (x, y) = (self.data[i][k], b.data[k][j]);
                    if sr.is_zero(x) || sr.is_zero(y) {
                        continue;
                    }
                    let term = sr.mul(x, y);
                    acc = Some(match acc {
                        None => term,
                        Some(a) => sr.add(a, term),
                    });
                }
                if let Some(v) = acc {
                    c.data[i][j] = v;
                }
            }
        }
        c
    }

    pub fn add<S: Semiring<Elem = T>>(&self, b: &Dense<T>, sr: &S) -> Dense<T> {
        assert_eq!((self.rows, self.cols), (b.rows, b.cols));
        let mut c = Self::zeros(self.rows, self.cols, sr);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let (x, y) = (self.data[i][j], b.data[i][j]);
                c.data[i][j] = if sr.is_zero(x) {
                    y
                } else if sr.is_zero(y) {
                    x
                } else {
                    sr.add(x, y)
                };
            }
        }
        c
    }

    /// Elementwise multiply; with `negate_b` the mask keeps entries of `self`
    /// exactly where `b` is zero.
    pub fn ewise_mult<S: Semiring<Elem = T>>(&self, b: &Dense<T>, negate_b: bool, sr: &S) -> Dense<T> {
        assert_eq!((self.rows, self.cols), (b.rows, b.cols));
        let mut c = Self::zeros(self.rows, self.cols, sr);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let (x, y) = (self.data[i][j], b.data[i][j]);
                if negate_b {
                    if sr.is_zero(y) {
                        c.data[i][j] = x;
                    }
                } else if !sr.is_zero(x) && !sr.is_zero(y) {
                    c.data[i][j] = sr.mul(x, y);
                }
            }
        }
        c
    }

    pub fn transpose(&self) -> Dense<T> {
        let mut t = Dense {
            rows: self.cols,
            cols: self.rows,
            data: vec![Vec::with_capacity(self.rows); self.cols],
        };
        for c in 0..self.cols {
            for r in 0..self.rows {
                t.data[c].push(self.data[r][c]);
            }
        }
        t
    }

    /// Submatrix selection `self[I, J]`, order-preserving and allowing
    /// repeated indices.
    pub fn extract(&self, i_idx: &[usize], j_idx: &[usize]) -> Dense<T> {
        Dense {
            rows: i_idx.len(),
            cols: j_idx.len(),
            data: i_idx
                .iter()
                .map(|&i| j_idx.iter().map(|&j| self.data[i][j]).collect())
                .collect(),
        }
    }

    /// Region assignment `self[I, J] = b`, everything else unchanged.
    pub fn assign(&self, i_idx: &[usize], j_idx: &[usize], b: &Dense<T>) -> Dense<T> {
        assert_eq!((i_idx.len(), j_idx.len()), (b.rows, b.cols));
        let mut out = self.clone();
        for (bi, &i) in i_idx.iter().enumerate() {
            for (bj, &j) in j_idx.iter().enumerate() {
                out.data[i][j] = b.data[bi][bj];
            }
        }
        out
    }
}

impl Dense<f64> {
    /// Relative-tolerance comparison for real-valued results.
    pub fn approx_eq(&self, other: &Dense<f64>, rel_tol: f64) -> bool {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                let (x, y) = (self.data[i][j], other.data[i][j]);
                if x == y {
                    continue;
                }
                if (x - y).abs() > rel_tol * x.abs().max(y.abs()) {
                    return false;
                }
            }
        }
        true
    }
}
