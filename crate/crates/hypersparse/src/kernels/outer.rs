//! Outer-product multiplication over DCSC.
//!
//! `C = A * B` is formed as the sum of outer products `A(:,k) (x) B(k,:)` over
//! the `ni` inner indices where both factors are nonempty. A priority queue
//! holds one cursor per active outer product, keyed by the `(col, row)` output
//! position of its next term (ties broken by ascending inner index), so terms
//! pop in column-major order and same-position terms fold in ascending inner
//! index order — one term at a time, which pins the floating point result.
//!
//! Working memory is `O(nnz(A) + nnz(B) + nnz(C))`: no array of length `rows`
//! or `cols` is ever allocated, so the kernel stays cheap on hypersparse
//! blocks whose dimension dwarfs their nonzero count.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::dcsc::DcscMatrix;
use crate::error::{Error, Result};
use crate::kernels::merge::RawTriple;
use crate::kernels::FlopCounter;
use crate::semiring::Semiring;

/// Tracks words of auxiliary memory held by the kernel; `peak_words` is the
/// high-water mark. Counts are exact functions of the input pattern sizes,
/// never of the matrix dimensions.
#[derive(Debug, Clone, Copy, Default)]
pub struct MemGauge {
    current: usize,
    pub peak_words: usize,
}

impl MemGauge {
    fn alloc(&mut self, words: usize) {
        self.current += words;
        self.peak_words = self.peak_words.max(self.current);
    }

    fn free(&mut self, words: usize) {
        self.current -= words;
    }
}

struct Cursor {
    a_start: usize,
    a_end: usize,
    a_pos: usize,
    bt_pos: usize,
    bt_end: usize,
}

/// Streams the raw terms of `A * B` (with `bt = B` transposed) in `(col, row,
/// inner)` order. Returns the number of active outer products.
fn stream_outer_products<T, S, F>(
    a: &DcscMatrix<T>,
    bt: &DcscMatrix<T>,
    sr: &S,
    counter: &mut FlopCounter,
    gauge: &mut MemGauge,
    mut emit: F,
) -> usize
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
    F: FnMut(usize, usize, T),
{
    // Active inner indices: nonempty columns of A that are nonempty rows of B,
    // found by merging the two sorted JC arrays.
    let mut cursors: Vec<Cursor> = Vec::new();
    let (mut ka, mut kb) = (0usize, 0usize);
    while ka < a.nzc() && kb < bt.nzc() {
        let (ja, jb) = (a.jc()[ka], bt.jc()[kb]);
        if ja == jb {
            cursors.push(Cursor {
                a_start: a.cp()[ka],
                a_end: a.cp()[ka + 1],
                a_pos: a.cp()[ka],
                bt_pos: bt.cp()[kb],
                bt_end: bt.cp()[kb + 1],
            });
            ka += 1;
            kb += 1;
        } else if ja < jb {
            ka += 1;
        } else {
            kb += 1;
        }
    }
    let ni = cursors.len();
    gauge.alloc(ni * 5); // cursor words

    // Heap key: (output col, output row, stage index). The stage index is the
    // rank of the inner index in ascending order.
    let mut heap: BinaryHeap<Reverse<(usize, usize, usize)>> = BinaryHeap::with_capacity(ni);
    gauge.alloc(ni * 3);
    for (s, cur) in cursors.iter().enumerate() {
        heap.push(Reverse((bt.ir()[cur.bt_pos], a.ir()[cur.a_pos], s)));
    }

    while let Some(Reverse((col, row, s))) = heap.pop() {
        let cur = &mut cursors[s];
        let term = sr.mul(a.num()[cur.a_pos], bt.num()[cur.bt_pos]);
        counter.multiplies += 1;
        emit(col, row, term);

        cur.a_pos += 1;
        if cur.a_pos == cur.a_end {
            cur.a_pos = cur.a_start;
            cur.bt_pos += 1;
        }
        if cur.bt_pos < cur.bt_end {
            heap.push(Reverse((bt.ir()[cur.bt_pos], a.ir()[cur.a_pos], s)));
        }
    }
    gauge.free(ni * 8);
    ni
}

fn check_dims<T: Copy + PartialEq + std::fmt::Debug>(a: &DcscMatrix<T>, b_rows: usize, b_cols: usize) -> Result<()> {
    if a.cols() != b_rows {
        return Err(Error::dims(
            format!("{}x{}", a.rows(), a.cols()),
            format!("{b_rows}x{b_cols}"),
            "matrix product inner dimensions",
        ));
    }
    Ok(())
}

/// `C = A * B` over DCSC operands.
pub fn hypersparse_gemm<T, S>(a: &DcscMatrix<T>, b: &DcscMatrix<T>, sr: &S) -> Result<(DcscMatrix<T>, FlopCounter)>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    let (c, fc, _) = hypersparse_gemm_instrumented(a, b, sr)?;
    Ok((c, fc))
}

/// As [`hypersparse_gemm`], additionally reporting the peak auxiliary memory
/// (in words) the kernel held.
pub fn hypersparse_gemm_instrumented<T, S>(
    a: &DcscMatrix<T>,
    b: &DcscMatrix<T>,
    sr: &S,
) -> Result<(DcscMatrix<T>, FlopCounter, MemGauge)>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    check_dims(a, b.rows(), b.cols())?;
    let mut gauge = MemGauge::default();
    // Local transpose gives row access to B; scratch is O(nnz(B)).
    gauge.alloc(3 * b.nnz());
    let bt = b.transpose();
    gauge.alloc(bt.storage_words());
    gauge.free(3 * b.nnz());

    let (c, fc) = gemm_pretransposed_gauged(a, &bt, sr, &mut gauge)?;
    gauge.free(bt.storage_words());
    Ok((c, fc, gauge))
}

/// `C = A * B` where the caller already holds `bt = B` transposed (as the
/// SUMMA inner loop does).
pub fn hypersparse_gemm_pretransposed<T, S>(
    a: &DcscMatrix<T>,
    bt: &DcscMatrix<T>,
    sr: &S,
) -> Result<(DcscMatrix<T>, FlopCounter)>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    let mut gauge = MemGauge::default();
    gemm_pretransposed_gauged(a, bt, sr, &mut gauge)
}

fn gemm_pretransposed_gauged<T, S>(
    a: &DcscMatrix<T>,
    bt: &DcscMatrix<T>,
    sr: &S,
    gauge: &mut MemGauge,
) -> Result<(DcscMatrix<T>, FlopCounter)>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    check_dims(a, bt.cols(), bt.rows())?;
    let mut fc = FlopCounter::default();
    let mut out: Vec<(usize, usize, T)> = Vec::new(); // (row, col, val), col-major
    let mut current: Option<(usize, usize, T)> = None;
    let mut out_words = 0usize;
    let mut adds = 0u64;

    stream_outer_products(a, bt, sr, &mut fc, gauge, |col, row, term| {
        current = Some(match current {
            Some((cc, cr, acc)) if cc == col && cr == row => {
                adds += 1;
                (col, row, sr.add(acc, term))
            }
            Some((cc, cr, acc)) => {
                if !sr.is_zero(acc) {
                    out.push((cr, cc, acc));
                    out_words += 3;
                }
                (col, row, term)
            }
            None => (col, row, term),
        });
    });
    if let Some((cc, cr, acc)) = current {
        if !sr.is_zero(acc) {
            out.push((cr, cc, acc));
            out_words += 3;
        }
    }
    fc.adds += adds;
    gauge.alloc(out_words);
    let c = DcscMatrix::from_sorted_entries(a.rows(), bt.rows(), out);
    gauge.alloc(c.storage_words());
    gauge.free(out_words);
    gauge.free(c.storage_words());
    Ok((c, fc))
}

/// Streams the *uncombined* terms of `A * B` (with `bt` pretransposed) into
/// `out`, sorted by `(col, row)` with same-position terms adjacent in
/// ascending inner-index order — the form [`TripleAccumulator`] expects.
///
/// [`TripleAccumulator`]: crate::kernels::merge::TripleAccumulator
pub fn outer_product_raw<T, S>(
    a: &DcscMatrix<T>,
    bt: &DcscMatrix<T>,
    sr: &S,
    counter: &mut FlopCounter,
    out: &mut Vec<RawTriple<T>>,
) -> Result<()>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    check_dims(a, bt.cols(), bt.rows())?;
    let mut gauge = MemGauge::default();
    stream_outer_products(a, bt, sr, counter, &mut gauge, |col, row, term| {
        out.push((col, row, term));
    });
    Ok(())
}
