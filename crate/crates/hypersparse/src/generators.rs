//! Reproducible input generators.
//!
//! All randomness comes from the ChaCha8 counter-based generator seeded
//! explicitly, so a `(generator, seed)` pair names a matrix: identical seeds
//! give identical matrices on every platform, and seeds are part of the CLI
//! interface.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csc::CscMatrix;
use crate::error::{Error, Result};
use crate::indexing::{spref, IndexVector};
use crate::semiring::PlusTimes;

/// Recursive-quadrant random graph parameters. The matrix is `2^scale`
/// square; `nnz_per_col * 2^scale` edge insertions descend the quadrant tree
/// with probabilities `(a, b, c, d)` per level. Duplicate insertions are
/// combined (values accumulate, so an entry's value is its insertion
/// multiplicity), which leaves the realized nonzero count somewhat below the
/// insertion count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmatParams {
    pub scale: u32,
    pub nnz_per_col: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub seed: u64,
}

impl RmatParams {
    /// The classic skewed defaults: `a = 0.6`, `b = c = d = 0.4 / 3`,
    /// eight nonzeros per column.
    pub fn new(scale: u32, seed: u64) -> Self {
        RmatParams {
            scale,
            nnz_per_col: 8,
            a: 0.6,
            b: 0.4 / 3.0,
            c: 0.4 / 3.0,
            d: 0.4 / 3.0,
            seed,
        }
    }

    pub fn dimension(&self) -> usize {
        1usize << self.scale
    }

    /// Edge insertions performed (the requested nonzero count).
    pub fn insertions(&self) -> usize {
        self.nnz_per_col * self.dimension()
    }

    fn validate(&self) -> Result<()> {
        let sum = self.a + self.b + self.c + self.d;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "quadrant probabilities sum to {sum}, expected 1"
            )));
        }
        if [self.a, self.b, self.c, self.d].iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidArgument("quadrant probabilities must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Generates a skewed-degree random matrix by recursive quadrant descent.
/// Quadrants are ordered `(a, b; c, d)`: `a` is top-left (low row, low
/// column), `b` top-right, `c` bottom-left, `d` bottom-right.
pub fn rmat(params: &RmatParams) -> Result<CscMatrix<f64>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.dimension();
    let mut entries = Vec::with_capacity(params.insertions());
    for _ in 0..params.insertions() {
        let (mut r, mut c) = (0usize, 0usize);
        for _ in 0..params.scale {
            let u: f64 = rng.random();
            let (rbit, cbit) = if u < params.a {
                (0, 0)
            } else if u < params.a + params.b {
                (0, 1)
            } else if u < params.a + params.b + params.c {
                (1, 0)
            } else {
                (1, 1)
            };
            r = (r << 1) | rbit;
            c = (c << 1) | cbit;
        }
        entries.push((r, c, 1.0));
    }
    CscMatrix::from_raw_entries(n, n, entries, &PlusTimes)
}

/// Uniform random matrix with exactly `nnz_per_col` distinct rows per column.
pub fn erdos_renyi(n_rows: usize, n_cols: usize, nnz_per_col: usize, seed: u64) -> Result<CscMatrix<f64>> {
    if nnz_per_col > n_rows {
        return Err(Error::InfeasibleDensity {
            requested: nnz_per_col,
            rows: n_rows,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n_cols * nnz_per_col);
    let mut chosen: Vec<usize> = Vec::with_capacity(nnz_per_col);
    for c in 0..n_cols {
        chosen.clear();
        while chosen.len() < nnz_per_col {
            let r = rng.random_range(0..n_rows);
            if !chosen.contains(&r) {
                chosen.push(r);
            }
        }
        entries.extend(chosen.iter().map(|&r| (r, c, 1.0)));
    }
    CscMatrix::from_raw_entries(n_rows, n_cols, entries, &PlusTimes)
}

/// Seeded uniform permutation of `0..n` (Fisher-Yates).
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Restriction operator of the given order: an `(n/order) x n` matrix with
/// exactly `n` nonzeros, one per column, mapping each fine vertex to its
/// aggregate. Aggregates are contiguous blocks of `order` vertices after a
/// seeded random relabeling, so `S * A * S^T` contracts `A` by summing over
/// aggregates.
pub fn restriction_operator(n: usize, order: usize, seed: u64) -> Result<CscMatrix<f64>> {
    if order == 0 || n % order != 0 {
        return Err(Error::OrderDoesNotDivide { order, n });
    }
    let relabel = random_permutation(n, seed);
    let entries: Vec<(usize, usize, f64)> = (0..n).map(|v| (relabel[v] / order, v, 1.0)).collect();
    CscMatrix::from_raw_entries(n / order, n, entries, &PlusTimes)
}

/// `P * A * P^T` for an explicit permutation: entry `(u, v)` of the result is
/// `A(perm(u), perm(v))`. Computed as an extraction with `I = J = perm`.
pub fn apply_symmetric_permutation(a: &CscMatrix<f64>, perm: &[usize]) -> Result<CscMatrix<f64>> {
    if a.rows() != a.cols() {
        return Err(Error::NonSquareMatrix {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let idx = IndexVector::new(perm.to_vec());
    spref(a, &idx, &idx, &PlusTimes)
}

/// Applies a seeded random symmetric permutation (the usual load-balancing
/// trick); returns the permuted matrix and the permutation used.
pub fn random_symmetric_permutation(a: &CscMatrix<f64>, seed: u64) -> Result<(CscMatrix<f64>, Vec<usize>)> {
    let perm = random_permutation(a.rows(), seed);
    let permuted = apply_symmetric_permutation(a, &perm)?;
    Ok((permuted, perm))
}

/// Splits a square matrix into its diagonal and off-diagonal parts,
/// `A = D + L`.
pub fn split_diagonal(a: &CscMatrix<f64>) -> Result<(CscMatrix<f64>, CscMatrix<f64>)> {
    if a.rows() != a.cols() {
        return Err(Error::NonSquareMatrix {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let mut diag = Vec::new();
    let mut off = Vec::new();
    for (r, c, v) in a.iter_entries() {
        if r == c {
            diag.push((r, c, v));
        } else {
            off.push((r, c, v));
        }
    }
    Ok((
        CscMatrix::from_raw_entries(a.rows(), a.cols(), diag, &PlusTimes)?,
        CscMatrix::from_raw_entries(a.rows(), a.cols(), off, &PlusTimes)?,
    ))
}

/// The `(index, value)` diagonal entries of a square matrix, sorted by index.
pub fn diagonal_entries(d: &CscMatrix<f64>) -> Vec<(usize, f64)> {
    d.iter_entries()
        .filter(|&(r, c, _)| r == c)
        .map(|(r, _, v)| (r, v))
        .collect()
}
