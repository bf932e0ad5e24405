//! Deferred merging of intermediate product triples.
//!
//! Stage-wise multiplication produces runs of raw `(col, row, value)` triples,
//! each run sorted by position with same-position terms adjacent in ascending
//! inner-index order. Runs are buffered and only combined when the buffered
//! volume crosses a threshold (and once at the end), via a multiway merge that
//! folds same-position terms one at a time in run order.
//!
//! Because every fold consumes terms in ascending global inner-index order and
//! a partial merge always collapses a *prefix* of that order, the final value
//! of each entry is the flat left-fold of its terms regardless of when (or
//! whether) intermediate merges happened. That makes results — including
//! floating point results — independent of the blocking parameter, the grid
//! shape, and the merge threshold; only operation counters vary.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::dcsc::DcscMatrix;
use crate::semiring::Semiring;

/// A raw product term addressed by output position, column-major key order.
pub type RawTriple<T> = (usize, usize, T); // (col, row, value)

/// Accumulates stage outputs and materializes the combined result.
#[derive(Debug)]
pub struct TripleAccumulator<T> {
    rows: usize,
    cols: usize,
    threshold: usize,
    /// Combined prefix: sorted by (col, row), at most one triple per position.
    combined: Vec<RawTriple<T>>,
    /// Uncombined runs in arrival order.
    pending: Vec<Vec<RawTriple<T>>>,
    pending_len: usize,
    /// Semiring adds performed while merging.
    adds: u64,
    /// Number of intermediate (threshold-triggered) merges.
    merges: u64,
}

impl<T: Copy + PartialEq + std::fmt::Debug> TripleAccumulator<T> {
    /// `threshold` bounds the buffered raw-triple count before an intermediate
    /// merge is forced.
    pub fn new(rows: usize, cols: usize, threshold: usize) -> Self {
        TripleAccumulator {
            rows,
            cols,
            threshold: threshold.max(1),
            combined: Vec::new(),
            pending: Vec::new(),
            pending_len: 0,
            adds: 0,
            merges: 0,
        }
    }

    /// Buffers one stage's raw output. Runs must arrive in ascending
    /// inner-index (stage) order.
    pub fn push_run<S>(&mut self, run: Vec<RawTriple<T>>, sr: &S)
    where
        S: Semiring<Elem = T>,
    {
        if run.is_empty() {
            return;
        }
        self.pending_len += run.len();
        self.pending.push(run);
        if self.combined.len() + self.pending_len > self.threshold {
            self.compact(sr);
            self.merges += 1;
        }
    }

    fn compact<S>(&mut self, sr: &S)
    where
        S: Semiring<Elem = T>,
    {
        if self.pending.is_empty() {
            return;
        }
        let mut lists: Vec<Vec<RawTriple<T>>> = Vec::with_capacity(self.pending.len() + 1);
        lists.push(std::mem::take(&mut self.combined));
        lists.append(&mut self.pending);
        self.pending_len = 0;
        self.combined = multiway_merge(lists, sr, &mut self.adds);
    }

    /// Final merge; returns the canonical matrix and the adds spent merging.
    pub fn finish<S>(mut self, sr: &S) -> (DcscMatrix<T>, u64)
    where
        S: Semiring<Elem = T>,
    {
        self.compact(sr);
        let m = DcscMatrix::from_sorted_entries(
            self.rows,
            self.cols,
            self.combined.into_iter().map(|(c, r, v)| (r, c, v)),
        );
        (m, self.adds)
    }

    pub fn intermediate_merges(&self) -> u64 {
        self.merges
    }

    pub fn buffered_triples(&self) -> usize {
        self.combined.len() + self.pending_len
    }
}

/// Merges sorted runs, folding same-position values one term at a time in run
/// order; entries that combine to the semiring zero are dropped.
pub fn multiway_merge<T, S>(lists: Vec<Vec<RawTriple<T>>>, sr: &S, adds: &mut u64) -> Vec<RawTriple<T>>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    let total: usize = lists.iter().map(Vec::len).sum();
    let mut out: Vec<RawTriple<T>> = Vec::with_capacity(total.min(1 << 20));

    // Heap key: (col, row, list index). Within one list, same-position terms
    // are adjacent, so re-pushing an advanced cursor keeps their order; across
    // lists the list index breaks ties, giving ascending stage order.
    let mut heap: BinaryHeap<Reverse<((usize, usize, usize), usize)>> = BinaryHeap::with_capacity(lists.len());
    let mut cursors: Vec<usize> = vec![0; lists.len()];
    for (li, list) in lists.iter().enumerate() {
        if let Some(&(c, r, _)) = list.first() {
            heap.push(Reverse(((c, r, li), 0)));
        }
    }

    let mut current: Option<(usize, usize, T)> = None;
    while let Some(Reverse(((c, r, li), pos))) = heap.pop() {
        let v = lists[li][pos].2;
        cursors[li] = pos + 1;
        if let Some(&(nc, nr, _)) = lists[li].get(pos + 1) {
            heap.push(Reverse(((nc, nr, li), pos + 1)));
        }
        current = Some(match current {
            Some((cc, cr, acc)) if cc == c && cr == r => {
                *adds += 1;
                (c, r, sr.add(acc, v))
            }
            Some((cc, cr, acc)) => {
                if !sr.is_zero(acc) {
                    out.push((cc, cr, acc));
                }
                (c, r, v)
            }
            None => (c, r, v),
        });
    }
    if let Some((cc, cr, acc)) = current {
        if !sr.is_zero(acc) {
            out.push((cc, cr, acc));
        }
    }
    out
}
