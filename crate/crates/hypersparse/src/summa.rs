//! Distributed SpGEMM on the simulated grid.
//!
//! Stage `q` of `C = A * B` broadcasts `b` consecutive global columns of `A`
//! along each grid row and the matching `b` global rows of `B` along each grid
//! column, then every rank multiplies the received slices and buffers the raw
//! product triples. Local `B` blocks are transposed up front (and restored at
//! the end) so row slices of `B` are cheap column slices of the stored form.
//!
//! Stage outputs are combined with the deferred-merge accumulator in stage
//! order, which folds every output entry's terms in ascending global inner
//! index — the same order the sequential kernels use. Gathered results are
//! therefore bitwise identical to the sequential product for every grid shape
//! and every legal blocking parameter.

use crate::dcsc::DcscMatrix;
use crate::error::{Error, Result};
use crate::grid::{
    broadcast_dcsc, gather, run_spmd, CommStats, DistMatrix, GridConfig, Group, LatencyModel, RankCtx, RunOpts,
};
use crate::kernels::{default_merge_threshold, outer_product_raw, FlopCounter, TripleAccumulator};
use crate::semiring::Semiring;

/// Stage schedule for one SUMMA run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SummaPlan {
    grid: GridConfig,
    /// Inner dimension (columns of A == rows of B).
    inner: usize,
    /// Columns/rows broadcast per stage.
    b: usize,
}

/// Broadcast roots and local slice ranges for one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SummaStage {
    /// Grid column owning this stage's slice of A.
    pub a_owner_col: usize,
    /// Grid row owning this stage's slice of B.
    pub b_owner_row: usize,
    /// Column range of the owner's local A block to broadcast.
    pub a_local_cols: (usize, usize),
    /// Column range of the owner's local (transposed) B block to broadcast.
    pub b_local_rows: (usize, usize),
}

impl SummaPlan {
    /// Validates grid/blocking legality: the grid must tile the inner
    /// dimension evenly and `b` must divide both `k/pr` and `k/pc`.
    pub fn new(grid: GridConfig, inner: usize, b: usize) -> Result<Self> {
        if inner % grid.pr != 0 || inner % grid.pc != 0 {
            return Err(Error::GridDoesNotTile {
                pr: grid.pr,
                pc: grid.pc,
                k: inner,
            });
        }
        let per_row = inner / grid.pr;
        let per_col = inner / grid.pc;
        if b == 0 || per_row % b != 0 || per_col % b != 0 {
            return Err(Error::InvalidBlocking { b, per_row, per_col });
        }
        Ok(SummaPlan { grid, inner, b })
    }

    /// All legal blocking parameters: the divisors of `gcd(k/pr, k/pc)`.
    pub fn legal_blockings(grid: GridConfig, inner: usize) -> Vec<usize> {
        if inner == 0 || inner % grid.pr != 0 || inner % grid.pc != 0 {
            return Vec::new();
        }
        let g = gcd(inner / grid.pr, inner / grid.pc);
        (1..=g).filter(|b| g % b == 0).collect()
    }

    /// Largest legal blocking parameter.
    pub fn max_blocking(grid: GridConfig, inner: usize) -> Option<usize> {
        Self::legal_blockings(grid, inner).into_iter().max()
    }

    pub fn blocking(&self) -> usize {
        self.b
    }

    /// Number of stages, `k / b` exactly.
    pub fn stages(&self) -> usize {
        self.inner / self.b
    }

    pub fn stage(&self, q: usize) -> SummaStage {
        debug_assert!(q < self.stages());
        let start = q * self.b;
        let per_col = self.inner / self.grid.pc; // A-block width
        let per_row = self.inner / self.grid.pr; // B-block height
        let a_owner_col = start / per_col;
        let b_owner_row = start / per_row;
        let a_lo = start % per_col;
        let b_lo = start % per_row;
        SummaStage {
            a_owner_col,
            b_owner_row,
            a_local_cols: (a_lo, a_lo + self.b),
            b_local_rows: (b_lo, b_lo + self.b),
        }
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Extent of the `idx`th block when `total` is split into `parts` ceil-sized
/// blocks (the last one ragged).
pub(crate) fn block_extent(total: usize, parts: usize, idx: usize) -> usize {
    let block = total.div_ceil(parts).max(1);
    total.saturating_sub(idx * block).min(block)
}

/// Rank-level SUMMA over local blocks: callable inside a larger SPMD program,
/// which is how the distributed indexing pipelines chain several products into
/// one run. `a_dims`/`b_dims` are the operands' *global* dimensions; `blk` of
/// `None` picks the largest legal blocking parameter. Returns this rank's
/// block of `C`.
pub fn summa_rank_local<T, S>(
    ctx: &mut RankCtx<'_>,
    a_local: &DcscMatrix<T>,
    a_dims: (usize, usize),
    b_local: &DcscMatrix<T>,
    b_dims: (usize, usize),
    blk: Option<usize>,
    sr: &S,
) -> Result<DcscMatrix<T>>
where
    T: Copy + PartialEq + std::fmt::Debug + Send + Sync + 'static,
    S: Semiring<Elem = T>,
{
    if a_dims.1 != b_dims.0 {
        return Err(Error::dims(
            format!("{}x{}", a_dims.0, a_dims.1),
            format!("{}x{}", b_dims.0, b_dims.1),
            "matrix product inner dimensions",
        ));
    }
    let grid = ctx.grid();
    let blk = match blk {
        Some(b) => b,
        None => SummaPlan::max_blocking(grid, a_dims.1).ok_or(Error::GridDoesNotTile {
            pr: grid.pr,
            pc: grid.pc,
            k: a_dims.1,
        })?,
    };
    let plan = SummaPlan::new(grid, a_dims.1, blk)?;
    let (i, j) = ctx.rank();
    let a_local = a_local.clone().with_aux();
    // Local transpose of B up front; restored (and checked) at the end.
    let bt_local = b_local.transpose().with_aux();

    // Per-rank deferred-merge bound; an intermediate merge is forced whenever
    // the buffered raw triples outgrow it.
    let threshold = ctx
        .opts()
        .merge_threshold
        .unwrap_or_else(|| default_merge_threshold(a_local.nnz(), b_local.nnz()));
    let mut acc = TripleAccumulator::new(
        block_extent(a_dims.0, grid.pr, i),
        block_extent(b_dims.1, grid.pc, j),
        threshold,
    );
    let mut fc = FlopCounter::default();

    for q in 0..plan.stages() {
        let stage = plan.stage(q);

        let a_payload = if j == stage.a_owner_col {
            Some(a_local.column_range(stage.a_local_cols.0, stage.a_local_cols.1)?)
        } else {
            None
        };
        let a_rem = broadcast_dcsc(ctx, Group::Row(i), (i, stage.a_owner_col), a_payload.as_ref())?;

        let bt_payload = if i == stage.b_owner_row {
            Some(bt_local.column_range(stage.b_local_rows.0, stage.b_local_rows.1)?)
        } else {
            None
        };
        let bt_rem = broadcast_dcsc(ctx, Group::Col(j), (stage.b_owner_row, j), bt_payload.as_ref())?;

        let mut run = Vec::new();
        outer_product_raw(&a_rem, &bt_rem, sr, &mut fc, &mut run)?;
        acc.push_run(run, sr);
    }

    let (c_local, merge_adds) = acc.finish(sr);
    fc.adds += merge_adds;
    ctx.record_compute(fc);

    // Restore the original B block from the transposed working copy.
    let restored = bt_local.transpose();
    debug_assert_eq!(&restored, b_local, "B block not restored after SUMMA");
    Ok(c_local)
}

/// Rank-level SUMMA over distributed operands.
pub fn summa_rank<T, S>(
    ctx: &mut RankCtx<'_>,
    a: &DistMatrix<T>,
    b: &DistMatrix<T>,
    plan: &SummaPlan,
    sr: &S,
) -> Result<DcscMatrix<T>>
where
    T: Copy + PartialEq + std::fmt::Debug + Send + Sync + 'static,
    S: Semiring<Elem = T>,
{
    let (i, j) = ctx.rank();
    summa_rank_local(
        ctx,
        a.block(i, j),
        (a.rows(), a.cols()),
        b.block(i, j),
        (b.rows(), b.cols()),
        Some(plan.blocking()),
        sr,
    )
}

/// `C = A * B` on the grid both operands are distributed over.
pub fn sparse_summa<T, S>(
    a: &DistMatrix<T>,
    b: &DistMatrix<T>,
    blk: usize,
    sr: &S,
) -> Result<(DistMatrix<T>, CommStats)>
where
    T: Copy + PartialEq + std::fmt::Debug + Send + Sync + 'static,
    S: Semiring<Elem = T>,
{
    sparse_summa_with(a, b, blk, sr, RunOpts::default())
}

/// [`sparse_summa`] with explicit execution mode, latency model, and merge
/// threshold.
pub fn sparse_summa_with<T, S>(
    a: &DistMatrix<T>,
    b: &DistMatrix<T>,
    blk: usize,
    sr: &S,
    opts: RunOpts,
) -> Result<(DistMatrix<T>, CommStats)>
where
    T: Copy + PartialEq + std::fmt::Debug + Send + Sync + 'static,
    S: Semiring<Elem = T>,
{
    if a.grid() != b.grid() {
        return Err(Error::dims(
            format!("{}x{}", a.grid().pr, a.grid().pc),
            format!("{}x{}", b.grid().pr, b.grid().pc),
            "operand grids",
        ));
    }
    if a.cols() != b.rows() {
        return Err(Error::dims(
            format!("{}x{}", a.rows(), a.cols()),
            format!("{}x{}", b.rows(), b.cols()),
            "matrix product inner dimensions",
        ));
    }
    let grid = a.grid();
    let plan = SummaPlan::new(grid, a.cols(), blk)?;
    let (blocks, stats) = run_spmd(grid, opts, |ctx| summa_rank(ctx, a, b, &plan, sr))?;
    Ok((
        DistMatrix::from_blocks(grid, a.rows(), b.cols(), blocks),
        stats,
    ))
}

/// Predicted per-rank communication and computation for a square grid, as pure
/// functions of the instance parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    /// Per-message latency constant (time units per message round).
    pub alpha: f64,
    /// Per-word transfer constant.
    pub beta: f64,
    pub p: usize,
    pub sqrt_p: usize,
    pub stages: usize,
    /// Entries received per rank over the whole run:
    /// `sqrt(p) * (nnz(A) + nnz(B)) / p`.
    pub per_rank_bcast_entries: f64,
    /// The same in words (3 words per entry).
    pub per_rank_bcast_words: f64,
    /// Messages received per rank: one A slice and one B slice per stage.
    pub per_rank_msgs_recv: f64,
    /// Messages a broadcast root sends under the flat model.
    pub root_msgs_per_bcast_flat: usize,
    /// Rounds per broadcast under the tree model.
    pub bcast_rounds_tree: usize,
    /// Streaming term of computation: `d * n / sqrt(p)`.
    pub comp_stream_term: f64,
    /// Multiplication flops per rank: `d^2 * n / p`.
    pub comp_mult_term: f64,
    /// Merge term `(d^2 n / p) * lg(d^2 n / (p sqrt(p)))`; reported, not
    /// asserted, since the bound mixes per-stage and total merge costs.
    pub comp_merge_lg_term: f64,
}

/// Evaluates the communication/computation model for `C = A * B` on `p`
/// ranks with blocking `blk`; `n` is the inner dimension and `d` the average
/// nonzeros per column. Requires square `p`.
pub fn predict_costs(
    nnz_a: usize,
    nnz_b: usize,
    n: usize,
    d: f64,
    p: usize,
    blk: usize,
) -> Result<CostModel> {
    let sqrt_p = (p as f64).sqrt().round() as usize;
    if sqrt_p * sqrt_p != p || p == 0 {
        return Err(Error::ModelUnsupported { p });
    }
    let stages = if blk == 0 { 0 } else { n / blk };
    let entries = if p == 1 {
        0.0
    } else {
        sqrt_p as f64 * (nnz_a + nnz_b) as f64 / p as f64
    };
    let dn = d * n as f64;
    let d2n = d * d * n as f64;
    let merge_arg = (d2n / (p as f64 * sqrt_p as f64)).max(2.0);
    Ok(CostModel {
        alpha: 1.0,
        beta: 1.0,
        p,
        sqrt_p,
        stages,
        per_rank_bcast_entries: entries,
        per_rank_bcast_words: 3.0 * entries,
        per_rank_msgs_recv: if p == 1 { 0.0 } else { 2.0 * stages as f64 },
        root_msgs_per_bcast_flat: sqrt_p - 1,
        bcast_rounds_tree: if sqrt_p <= 1 {
            0
        } else {
            (usize::BITS - (sqrt_p - 1).leading_zeros()) as usize
        },
        comp_stream_term: dn / sqrt_p as f64,
        comp_mult_term: d2n / p as f64,
        comp_merge_lg_term: d2n / p as f64 * merge_arg.log2(),
    })
}

impl CostModel {
    pub fn with_constants(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    /// Modeled per-rank communication time: two broadcasts per stage charged
    /// `alpha` per round plus `beta` per received word.
    pub fn t_comm(&self, latency: LatencyModel) -> f64 {
        let rounds = match latency {
            LatencyModel::Flat => self.root_msgs_per_bcast_flat as f64,
            LatencyModel::Tree => self.bcast_rounds_tree as f64,
        };
        2.0 * self.stages as f64 * self.alpha * rounds + self.beta * self.per_rank_bcast_words
    }

    /// Modeled per-rank computation time.
    pub fn t_comp(&self) -> f64 {
        self.comp_stream_term + self.comp_mult_term + self.comp_merge_lg_term
    }

    /// Rows in the same CSV schema as `CommStats` (rank columns are `-1`).
    pub fn csv_rows(&self) -> Vec<String> {
        vec![
            format!(
                "-1,-1,model_broadcast,{},{},0,0",
                self.per_rank_msgs_recv, self.per_rank_bcast_words
            ),
            format!("-1,-1,model_compute,0,0,{},0", self.comp_mult_term),
        ]
    }
}

/// Convenience: run SUMMA and cross-check the gathered result against the
/// sequential column-wise product. Returns the gathered product.
pub fn summa_gather_checked<T, S>(
    a: &DistMatrix<T>,
    b: &DistMatrix<T>,
    blk: usize,
    sr: &S,
    opts: RunOpts,
) -> Result<(crate::csc::CscMatrix<T>, CommStats)>
where
    T: Copy + PartialEq + std::fmt::Debug + Send + Sync + 'static,
    S: Semiring<Elem = T>,
{
    let (c_dist, stats) = sparse_summa_with(a, b, blk, sr, opts)?;
    Ok((gather(&c_dist, sr), stats))
}
