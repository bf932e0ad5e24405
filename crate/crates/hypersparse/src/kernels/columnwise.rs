//! Column-wise SpGEMM with a sparse accumulator.
//!
//! The classical column-by-column formulation: for each column `j` of `B`,
//! the columns `A(:,k)` selected by the nonzeros `B(k,j)` are scaled and
//! accumulated into a SPA, then flushed into `C(:,j)`. Runs in
//! `O(flops + nnz + n)` time and is the workhorse for ordinary (non
//! hypersparse) operands.

use crate::csc::CscMatrix;
use crate::error::{Error, Result};
use crate::kernels::FlopCounter;
use crate::semiring::Semiring;

/// Sparse accumulator: dense value/occupancy arrays of length `rows` plus the
/// list of touched rows, so clearing costs only the occupancy of the column
/// just flushed.
#[derive(Debug)]
pub struct SpaAccumulator<T> {
    value: Vec<T>,
    occupied: Vec<bool>,
    touched: Vec<usize>,
}

impl<T: Copy + PartialEq + std::fmt::Debug> SpaAccumulator<T> {
    pub fn new<S: Semiring<Elem = T>>(rows: usize, sr: &S) -> Self {
        SpaAccumulator {
            value: vec![sr.zero(); rows],
            occupied: vec![false; rows],
            touched: Vec::new(),
        }
    }

    /// Accumulates one term into row `i`. The first term for a row seeds the
    /// slot directly; later terms fold onto it with the semiring add.
    #[inline]
    pub fn scatter<S: Semiring<Elem = T>>(&mut self, i: usize, term: T, sr: &S, counter: &mut FlopCounter) {
        if self.occupied[i] {
            self.value[i] = sr.add(self.value[i], term);
            counter.adds += 1;
        } else {
            self.occupied[i] = true;
            self.value[i] = term;
            self.touched.push(i);
        }
    }

    pub fn occupancy(&self) -> usize {
        self.touched.len()
    }

    /// Emits the accumulated column sorted by row index, dropping zeros, and
    /// clears only the touched slots.
    pub fn flush_into<S: Semiring<Elem = T>>(&mut self, sr: &S, ir: &mut Vec<usize>, num: &mut Vec<T>) {
        self.touched.sort_unstable();
        for &i in &self.touched {
            if !sr.is_zero(self.value[i]) {
                ir.push(i);
                num.push(self.value[i]);
            }
            self.occupied[i] = false;
            self.value[i] = sr.zero();
        }
        self.touched.clear();
    }
}

/// `C = A * B` over CSC operands.
pub fn columnwise_spgemm<T, S>(a: &CscMatrix<T>, b: &CscMatrix<T>, sr: &S) -> Result<(CscMatrix<T>, FlopCounter)>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    if a.cols() != b.rows() {
        return Err(Error::dims(
            format!("{}x{}", a.rows(), a.cols()),
            format!("{}x{}", b.rows(), b.cols()),
            "matrix product inner dimensions",
        ));
    }
    let mut fc = FlopCounter::default();
    let mut spa = SpaAccumulator::new(a.rows(), sr);
    let mut cp = Vec::with_capacity(b.cols() + 1);
    cp.push(0usize);
    let mut ir = Vec::new();
    let mut num = Vec::new();

    for j in 0..b.cols() {
        let (ks, bvals) = b.col(j);
        for (&k, &bv) in ks.iter().zip(bvals) {
            let (is, avals) = a.col(k);
            fc.multiplies += is.len() as u64;
            for (&i, &av) in is.iter().zip(avals) {
                spa.scatter(i, sr.mul(av, bv), sr, &mut fc);
            }
        }
        spa.flush_into(sr, &mut ir, &mut num);
        cp.push(ir.len());
    }
    Ok((CscMatrix::from_parts(a.rows(), b.cols(), cp, ir, num), fc))
}
