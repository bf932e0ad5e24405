//! Simulated 2D process grid: block distribution, SPMD execution, collectives,
//! and communication accounting.

pub mod collectives;
mod runtime;
mod stats;

pub use collectives::{
    alltoall, broadcast, broadcast_dcsc, scatter, scatter_from_diagonal, transpose_exchange,
    transpose_exchange_block, Group,
};
pub use runtime::{run_spmd, ExecMode, LatencyModel, RankCtx, RunOpts};
pub use stats::{CollectiveKind, CommStats, Counter, RankStats, COLLECTIVE_KINDS};

use crate::csc::CscMatrix;
use crate::dcsc::DcscMatrix;
use crate::error::{Error, Result};
use crate::semiring::Semiring;

/// A `pr x pc` logical process grid; rank `(i, j)` has linear id `i * pc + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridConfig {
    pub pr: usize,
    pub pc: usize,
}

impl GridConfig {
    pub fn new(pr: usize, pc: usize) -> Self {
        assert!(pr >= 1 && pc >= 1, "grid must have at least one rank");
        GridConfig { pr, pc }
    }

    pub fn size(&self) -> usize {
        self.pr * self.pc
    }

    pub fn is_square(&self) -> bool {
        self.pr == self.pc
    }

    pub fn linear(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.pr && j < self.pc);
        i * self.pc + j
    }

    pub fn coords(&self, linear: usize) -> (usize, usize) {
        (linear / self.pc, linear % self.pc)
    }
}

/// A matrix 2D-block-decomposed over a grid: rank `(i, j)` owns the submatrix
/// of rows `[i*ceil(m/pr) ..)` and columns `[j*ceil(n/pc) ..)` as a local DCSC
/// block with rebased indices. The final block in each dimension absorbs the
/// remainder when the grid does not divide the dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DistMatrix<T> {
    grid: GridConfig,
    rows: usize,
    cols: usize,
    row_block: usize,
    col_block: usize,
    blocks: Vec<DcscMatrix<T>>,
}

impl<T: Copy + PartialEq + std::fmt::Debug> DistMatrix<T> {
    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Nominal block height (rows per grid row, except a ragged last block).
    pub fn row_block(&self) -> usize {
        self.row_block
    }

    pub fn col_block(&self) -> usize {
        self.col_block
    }

    /// Rows owned by grid row `i`.
    pub fn block_rows(&self, i: usize) -> usize {
        self.rows.saturating_sub(i * self.row_block).min(self.row_block)
    }

    /// Columns owned by grid column `j`.
    pub fn block_cols(&self, j: usize) -> usize {
        self.cols.saturating_sub(j * self.col_block).min(self.col_block)
    }

    pub fn block(&self, i: usize, j: usize) -> &DcscMatrix<T> {
        &self.blocks[self.grid.linear(i, j)]
    }

    pub fn blocks(&self) -> &[DcscMatrix<T>] {
        &self.blocks
    }

    pub fn nnz(&self) -> usize {
        self.blocks.iter().map(DcscMatrix::nnz).sum()
    }

    /// Assembles from per-rank blocks (in linear rank order).
    pub fn from_blocks(grid: GridConfig, rows: usize, cols: usize, blocks: Vec<DcscMatrix<T>>) -> Self {
        assert_eq!(blocks.len(), grid.size());
        let row_block = rows.div_ceil(grid.pr).max(1);
        let col_block = cols.div_ceil(grid.pc).max(1);
        for (lin, b) in blocks.iter().enumerate() {
            let (i, j) = grid.coords(lin);
            debug_assert_eq!(b.rows(), rows.saturating_sub(i * row_block).min(row_block));
            debug_assert_eq!(b.cols(), cols.saturating_sub(j * col_block).min(col_block));
        }
        DistMatrix {
            grid,
            rows,
            cols,
            row_block,
            col_block,
            blocks,
        }
    }
}

/// Scatters a sequential matrix onto the grid with the 2D block decomposition.
pub fn distribute<T>(a: &CscMatrix<T>, grid: GridConfig) -> DistMatrix<T>
where
    T: Copy + PartialEq + std::fmt::Debug,
{
    let row_block = a.rows().div_ceil(grid.pr).max(1);
    let col_block = a.cols().div_ceil(grid.pc).max(1);
    let mut per_block: Vec<Vec<(usize, usize, T)>> = vec![Vec::new(); grid.size()];
    for (r, c, v) in a.iter_entries() {
        let (bi, bj) = (r / row_block, c / col_block);
        per_block[grid.linear(bi, bj)].push((r - bi * row_block, c - bj * col_block, v));
    }
    let blocks = per_block
        .into_iter()
        .enumerate()
        .map(|(lin, entries)| {
            let (i, j) = grid.coords(lin);
            let br = a.rows().saturating_sub(i * row_block).min(row_block);
            let bc = a.cols().saturating_sub(j * col_block).min(col_block);
            // Global column-major iteration keeps each block's entries sorted.
            DcscMatrix::from_sorted_entries(br, bc, entries)
        })
        .collect();
    DistMatrix {
        grid,
        rows: a.rows(),
        cols: a.cols(),
        row_block,
        col_block,
        blocks,
    }
}

/// Reassembles the sequential matrix; exact inverse of [`distribute`].
pub fn gather<T, S>(d: &DistMatrix<T>, sr: &S) -> CscMatrix<T>
where
    T: Copy + PartialEq + std::fmt::Debug,
    S: Semiring<Elem = T>,
{
    let mut entries = Vec::with_capacity(d.nnz());
    for i in 0..d.grid.pr {
        for j in 0..d.grid.pc {
            let (ro, co) = (i * d.row_block, j * d.col_block);
            for (r, c, v) in d.block(i, j).iter_entries() {
                entries.push((r + ro, c + co, v));
            }
        }
    }
    CscMatrix::from_raw_entries(d.rows, d.cols, entries, sr).expect("block entries are in range")
}

/// How a distributed vector's entries are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorMode {
    /// Contiguous pieces on the diagonal ranks `P(d, d)`; square grids only.
    Diagonal,
    /// Contiguous pieces across all ranks in linear rank order.
    Block,
}

/// A distributed index vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistVector {
    len: usize,
    mode: VectorMode,
    piece_len: usize,
    /// Per linear rank; empty for ranks holding nothing.
    pieces: Vec<Vec<usize>>,
}

impl DistVector {
    /// Splits `entries` into `pr` contiguous pieces on the diagonal ranks.
    pub fn diagonal(entries: &[usize], grid: GridConfig) -> Result<Self> {
        if !grid.is_square() {
            return Err(Error::NonSquareGrid { pr: grid.pr, pc: grid.pc });
        }
        let piece_len = entries.len().div_ceil(grid.pr).max(1);
        let mut pieces = vec![Vec::new(); grid.size()];
        for d in 0..grid.pr {
            let lo = (d * piece_len).min(entries.len());
            let hi = ((d + 1) * piece_len).min(entries.len());
            pieces[grid.linear(d, d)] = entries[lo..hi].to_vec();
        }
        Ok(DistVector {
            len: entries.len(),
            mode: VectorMode::Diagonal,
            piece_len,
            pieces,
        })
    }

    /// Splits `entries` into `p` contiguous pieces across all ranks.
    pub fn block(entries: &[usize], grid: GridConfig) -> Self {
        let p = grid.size();
        let piece_len = entries.len().div_ceil(p).max(1);
        let pieces = (0..p)
            .map(|r| {
                let lo = (r * piece_len).min(entries.len());
                let hi = ((r + 1) * piece_len).min(entries.len());
                entries[lo..hi].to_vec()
            })
            .collect();
        DistVector {
            len: entries.len(),
            mode: VectorMode::Block,
            piece_len,
            pieces,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mode(&self) -> VectorMode {
        self.mode
    }

    /// Length of every piece except possibly the last.
    pub fn piece_len(&self) -> usize {
        self.piece_len
    }

    pub fn piece(&self, linear_rank: usize) -> &[usize] {
        &self.pieces[linear_rank]
    }

    /// Global offset of the piece held at `linear_rank`'s slot.
    pub fn piece_offset(&self, grid: GridConfig, linear_rank: usize) -> usize {
        match self.mode {
            VectorMode::Diagonal => {
                let (d, _) = grid.coords(linear_rank);
                d * self.piece_len
            }
            VectorMode::Block => linear_rank * self.piece_len,
        }
    }

    /// Concatenation of all pieces in placement order.
    pub fn concat(&self, grid: GridConfig) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len);
        match self.mode {
            VectorMode::Diagonal => {
                for d in 0..grid.pr {
                    out.extend_from_slice(&self.pieces[grid.linear(d, d)]);
                }
            }
            VectorMode::Block => {
                for piece in &self.pieces {
                    out.extend_from_slice(piece);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::PlusTimes;
    use crate::triples::TripleList;

    fn nine_by_nine() -> CscMatrix<f64> {
        let t = TripleList::from_entries(
            9,
            9,
            vec![(5, 0, 0.1), (7, 0, 0.2), (3, 6, 0.3), (1, 7, 0.4)],
        )
        .unwrap();
        CscMatrix::from_triples(&t, &PlusTimes).unwrap()
    }

    #[test]
    fn single_rank_grid_holds_everything() {
        let a = nine_by_nine();
        let d = distribute(&a, GridConfig::new(1, 1));
        assert_eq!(d.block(0, 0).to_csc(), a);
        assert_eq!(gather(&d, &PlusTimes), a);
    }

    #[test]
    fn three_by_three_blocks_are_three_by_three() {
        let a = nine_by_nine();
        let d = distribute(&a, GridConfig::new(3, 3));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!((d.block(i, j).rows(), d.block(i, j).cols()), (3, 3));
            }
        }
        // Entry (5,0) lands on rank (1,0) at local (2,0).
        let b = d.block(1, 0);
        assert_eq!(b.iter_entries().collect::<Vec<_>>(), vec![(2, 0, 0.1)]);
        assert_eq!(gather(&d, &PlusTimes), a);
    }

    #[test]
    fn empty_matrix_gathers_empty() {
        let a = CscMatrix::<f64>::empty(10, 10);
        let d = distribute(&a, GridConfig::new(3, 3));
        assert_eq!(d.nnz(), 0);
        assert_eq!(gather(&d, &PlusTimes), a);
    }

    #[test]
    fn ragged_blocks_tile_exactly() {
        let t = TripleList::from_entries(7, 5, (0..7).map(|r| (r, r % 5, r as f64 + 1.0)).collect()).unwrap();
        let a = CscMatrix::from_triples(&t, &PlusTimes).unwrap();
        for (pr, pc) in [(2, 2), (3, 2), (2, 3), (4, 4), (7, 5)] {
            let d = distribute(&a, GridConfig::new(pr, pc));
            assert_eq!(gather(&d, &PlusTimes), a, "grid {pr}x{pc}");
            let total_rows: usize = (0..pr).map(|i| d.block_rows(i)).sum();
            let total_cols: usize = (0..pc).map(|j| d.block_cols(j)).sum();
            assert_eq!((total_rows, total_cols), (7, 5));
        }
    }

    #[test]
    fn diagonal_vector_pieces() {
        let grid = GridConfig::new(3, 3);
        let v = DistVector::diagonal(&[6, 1, 4, 7, 0, 2], grid).unwrap();
        assert_eq!(v.piece(grid.linear(0, 0)), &[6, 1]);
        assert_eq!(v.piece(grid.linear(1, 1)), &[4, 7]);
        assert_eq!(v.piece(grid.linear(2, 2)), &[0, 2]);
        assert_eq!(v.concat(grid), vec![6, 1, 4, 7, 0, 2]);
        assert!(DistVector::diagonal(&[1], GridConfig::new(2, 3)).is_err());
    }
}
