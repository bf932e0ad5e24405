//! Sequential computational kernels.
//!
//! Two SpGEMM formulations (column-wise over CSC, outer-product over DCSC)
//! compute identical results — bitwise identical, because both fold the terms
//! of each output entry in ascending inner-index order, seeded with the first
//! term. Pointwise addition, masked elementwise multiplication, and the
//! deferred-merge accumulator live here too.
//!
//! `multiplies` counts semiring multiplications ("flops" in the classical
//! sense); semiring additions are tracked separately since conventions on
//! whether an add pairs with every multiply vary.

mod columnwise;
mod ewise;
pub mod merge;
mod outer;

pub use columnwise::{columnwise_spgemm, SpaAccumulator};
pub use ewise::{ewise_mult, scale_columns, sparse_add};
pub use merge::{multiway_merge, RawTriple, TripleAccumulator};
pub use outer::{
    hypersparse_gemm, hypersparse_gemm_instrumented, hypersparse_gemm_pretransposed, outer_product_raw, MemGauge,
};

use crate::dcsc::DcscMatrix;
use crate::error::{Error, Result};

/// Exact operation counts for one kernel invocation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlopCounter {
    /// Semiring multiplications performed.
    pub multiplies: u64,
    /// Semiring additions performed.
    pub adds: u64,
}

impl FlopCounter {
    pub fn merge(&mut self, other: FlopCounter) {
        self.multiplies += other.multiplies;
        self.adds += other.adds;
    }
}

/// Default deferred-merge threshold: buffered raw triples may grow to sixteen
/// times the larger operand before an intermediate merge is forced.
pub fn default_merge_threshold(nnz_a: usize, nnz_b: usize) -> usize {
    16 * nnz_a.max(nnz_b).max(1)
}

/// Number of semiring multiplications `A * B` would perform, i.e.
/// `sum_k nnz(A(:,k)) * nnz(B(k,:))`, without forming the product.
pub fn count_flops<T>(a: &DcscMatrix<T>, b: &DcscMatrix<T>) -> Result<u64>
where
    T: Copy + PartialEq + std::fmt::Debug,
{
    if a.cols() != b.rows() {
        return Err(Error::dims(
            format!("{}x{}", a.rows(), a.cols()),
            format!("{}x{}", b.rows(), b.cols()),
            "matrix product inner dimensions",
        ));
    }
    // Row occupancy of B from its sorted row indices; merged against the
    // nonempty columns of A. No dimension-length scratch.
    let mut b_rows: Vec<usize> = b.ir().to_vec();
    b_rows.sort_unstable();

    let mut flops = 0u64;
    let mut pos = 0usize;
    for ka in 0..a.nzc() {
        let k = a.jc()[ka];
        while pos < b_rows.len() && b_rows[pos] < k {
            pos += 1;
        }
        let start = pos;
        while pos < b_rows.len() && b_rows[pos] == k {
            pos += 1;
        }
        let nnz_b_row = pos - start;
        if nnz_b_row > 0 {
            let nnz_a_col = (a.cp()[ka + 1] - a.cp()[ka]) as u64;
            flops += nnz_a_col * nnz_b_row as u64;
        }
    }
    Ok(flops)
}
