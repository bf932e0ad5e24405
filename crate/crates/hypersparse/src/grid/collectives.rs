//! Collectives over the simulated grid.
//!
//! Rank-level functions (callable inside a running SPMD program) plus
//! standalone wrappers that spin up a grid run for one collective — the
//! wrappers exist mostly for direct testing of the collectives' contracts.
//!
//! Matrix payloads travel as triple lists with block-local indices and are
//! charged 3 words per entry; index payloads are charged 1 word per element.

use std::collections::BTreeMap;

use crate::dcsc::DcscMatrix;
use crate::error::{Error, Result};
use crate::grid::runtime::{run_spmd, LatencyModel, RankCtx, RunOpts};
use crate::grid::stats::{CollectiveKind, CommStats};
use crate::grid::{DistMatrix, DistVector, GridConfig, VectorMode};

/// A broadcast group: one grid row or one grid column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Row(usize),
    Col(usize),
}

impl Group {
    /// Members in coordinate order.
    pub fn members(self, grid: GridConfig) -> Vec<(usize, usize)> {
        match self {
            Group::Row(i) => (0..grid.pc).map(|j| (i, j)).collect(),
            Group::Col(j) => (0..grid.pr).map(|i| (i, j)).collect(),
        }
    }

    pub fn contains(self, rank: (usize, usize)) -> bool {
        match self {
            Group::Row(i) => rank.0 == i,
            Group::Col(j) => rank.1 == j,
        }
    }
}

/// Wire form of a matrix payload: dims plus entries in column-major order.
struct TriplesMsg<T> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Copy + PartialEq + std::fmt::Debug + Send + 'static> TriplesMsg<T> {
    fn pack(m: &DcscMatrix<T>) -> Self {
        TriplesMsg {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.iter_entries().collect(),
        }
    }

    fn words(&self) -> u64 {
        3 * self.entries.len() as u64
    }

    fn unpack(self) -> DcscMatrix<T> {
        DcscMatrix::from_sorted_entries(self.rows, self.cols, self.entries)
    }
}

/// Broadcasts `payload` (present at `root`) to every rank of `group`; call
/// from each member. Returns the member's copy.
///
/// Flat routing has the root send `g - 1` direct messages; tree routing uses a
/// binomial tree (`ceil(lg g)` rounds) with intermediate ranks forwarding.
/// Total word volume is `(g - 1) * payload` either way.
pub fn broadcast_dcsc<T>(
    ctx: &mut RankCtx<'_>,
    group: Group,
    root: (usize, usize),
    payload: Option<&DcscMatrix<T>>,
) -> Result<DcscMatrix<T>>
where
    T: Copy + PartialEq + std::fmt::Debug + Send + 'static,
{
    if !group.contains(root) {
        return Err(Error::RootNotInGroup {
            root_i: root.0,
            root_j: root.1,
        });
    }
    let members = group.members(ctx.grid());
    let me = ctx.rank();
    debug_assert!(group.contains(me), "caller must be a group member");
    let g = members.len();
    let my_pos = members.iter().position(|&m| m == me).unwrap();
    let root_pos = members.iter().position(|&m| m == root).unwrap();

    if me == root {
        let m = payload.expect("root must supply the broadcast payload");
        if g > 1 {
            match ctx.latency() {
                LatencyModel::Flat => {
                    for &dst in &members {
                        if dst == me {
                            continue;
                        }
                        let msg = TriplesMsg::pack(m);
                        let words = msg.words();
                        ctx.send_to(dst, CollectiveKind::Broadcast, 1, words, msg)?;
                    }
                }
                LatencyModel::Tree => {
                    binomial_send(ctx, &members, root_pos, 0, m)?;
                }
            }
        }
        return Ok(m.clone());
    }

    match ctx.latency() {
        LatencyModel::Flat => {
            let msg: TriplesMsg<T> = ctx.recv_from(root)?;
            Ok(msg.unpack())
        }
        LatencyModel::Tree => {
            let rel = (my_pos + g - root_pos) % g;
            // Receive at the round where the binomial tree reaches us, then
            // forward in the remaining rounds.
            let recv_round = rel.ilog2() as usize;
            let parent_rel = rel - (1 << recv_round);
            let parent = members[(root_pos + parent_rel) % g];
            let msg: TriplesMsg<T> = ctx.recv_from(parent)?;
            let m = msg.unpack();
            binomial_send(ctx, &members, root_pos, recv_round + 1, &m)?;
            Ok(m)
        }
    }
}

/// Sends along the binomial broadcast tree from `start_round` on. `rel` is a
/// rank's offset from the root within the member ring.
fn binomial_send<T>(
    ctx: &mut RankCtx<'_>,
    members: &[(usize, usize)],
    root_pos: usize,
    start_round: usize,
    m: &DcscMatrix<T>,
) -> Result<()>
where
    T: Copy + PartialEq + std::fmt::Debug + Send + 'static,
{
    let g = members.len();
    let me = ctx.rank();
    let my_pos = members.iter().position(|&p| p == me).unwrap();
    let rel = (my_pos + g - root_pos) % g;
    let rounds = usize::BITS - (g - 1).leading_zeros(); // ceil(lg g)
    for t in start_round..rounds as usize {
        let mask = 1usize << t;
        if rel < mask && rel + mask < g {
            let dst = members[(root_pos + rel + mask) % g];
            let msg = TriplesMsg::pack(m);
            let words = msg.words();
            ctx.send_to(dst, CollectiveKind::Broadcast, 1, words, msg)?;
        }
    }
    Ok(())
}

/// Standalone broadcast over a fresh grid run; returns every member's copy
/// (indexed by position in the group) and the stats.
pub fn broadcast<T>(
    grid: GridConfig,
    opts: RunOpts,
    group: Group,
    root: (usize, usize),
    payload: &DcscMatrix<T>,
) -> Result<(Vec<DcscMatrix<T>>, CommStats)>
where
    T: Copy + PartialEq + std::fmt::Debug + Send + Sync + 'static,
{
    if !group.contains(root) {
        return Err(Error::RootNotInGroup {
            root_i: root.0,
            root_j: root.1,
        });
    }
    let (results, stats) = run_spmd(grid, opts, |ctx| {
        if !group.contains(ctx.rank()) {
            return Ok(None);
        }
        let src = if ctx.rank() == root { Some(payload) } else { None };
        broadcast_dcsc(ctx, group, root, src).map(Some)
    })?;
    Ok((results.into_iter().flatten().collect(), stats))
}

/// Scatters a diagonal-mode vector to one grid column: after the call, rank
/// `(d, target_col)` holds the contiguous piece that lived on `P(d, d)`.
/// Each diagonal rank sends its piece (1 word per element) within its row;
/// under the tree latency model the send is charged `ceil(lg pr)` rounds.
pub fn scatter_from_diagonal(
    ctx: &mut RankCtx<'_>,
    v: &DistVector,
    target_col: usize,
) -> Result<Option<Vec<usize>>> {
    let grid = ctx.grid();
    if v.mode() != VectorMode::Diagonal {
        return Err(Error::InvalidArgument(
            "scatter_from_diagonal requires a diagonal-mode vector".into(),
        ));
    }
    if !grid.is_square() {
        return Err(Error::NonSquareGrid { pr: grid.pr, pc: grid.pc });
    }
    let (i, j) = ctx.rank();
    let mut out = None;
    if i == j {
        let piece = v.piece(grid.linear(i, i)).to_vec();
        if j == target_col {
            out = Some(piece);
        } else {
            let words = piece.len() as u64;
            let rounds = match ctx.latency() {
                LatencyModel::Flat => 1,
                LatencyModel::Tree => u64::from(u32::max(1, usize::BITS - (grid.pr - 1).leading_zeros())),
            };
            ctx.send_to((i, target_col), CollectiveKind::Scatter, rounds, words, piece)?;
        }
    } else if j == target_col {
        let piece: Vec<usize> = ctx.recv_from((i, i))?;
        out = Some(piece);
    }
    Ok(out)
}

/// Standalone scatter wrapper: returns the pieces received down `target_col`
/// (top to bottom) and the stats.
pub fn scatter(
    grid: GridConfig,
    opts: RunOpts,
    v: &DistVector,
    target_col: usize,
) -> Result<(Vec<Vec<usize>>, CommStats)> {
    let (results, stats) = run_spmd(grid, opts, |ctx| scatter_from_diagonal(ctx, v, target_col))?;
    Ok((results.into_iter().flatten().collect(), stats))
}

/// Global transpose on a square grid: rank `(i, j)` ends with the transpose of
/// the old block `(j, i)`, exchanged pairwise with its diagonal neighbor.
pub fn transpose_exchange_block<T>(ctx: &mut RankCtx<'_>, local: &DcscMatrix<T>) -> Result<DcscMatrix<T>>
where
    T: Copy + PartialEq + std::fmt::Debug + Send + 'static,
{
    let grid = ctx.grid();
    if !grid.is_square() {
        return Err(Error::NonSquareGrid { pr: grid.pr, pc: grid.pc });
    }
    let (i, j) = ctx.rank();
    if i == j {
        return Ok(local.transpose());
    }
    let mine = local.transpose();
    let msg = TriplesMsg::pack(&mine);
    let words = msg.words();
    ctx.send_to((j, i), CollectiveKind::Transpose, 1, words, msg)?;
    let theirs: TriplesMsg<T> = ctx.recv_from((j, i))?;
    Ok(theirs.unpack())
}

/// Distributed transpose of a whole matrix.
pub fn transpose_exchange<T>(d: &DistMatrix<T>, opts: RunOpts) -> Result<(DistMatrix<T>, CommStats)>
where
    T: Copy + PartialEq + std::fmt::Debug + Send + Sync + 'static,
{
    let grid = d.grid();
    let (blocks, stats) = run_spmd(grid, opts, |ctx| {
        let (i, j) = ctx.rank();
        transpose_exchange_block(ctx, d.block(i, j))
    })?;
    Ok((DistMatrix::from_blocks(grid, d.cols(), d.rows(), blocks), stats))
}

/// Reroutes a block-mode vector's `(global position, value)` pairs so each
/// entry lands on `dest(position, value)`. Returns this rank's received
/// entries sorted by position. Total words are conserved; only nonempty
/// batches are charged.
pub fn alltoall<F>(
    ctx: &mut RankCtx<'_>,
    v: &DistVector,
    dest: F,
) -> Result<Vec<(usize, usize)>>
where
    F: Fn(usize, usize) -> usize,
{
    let grid = ctx.grid();
    let p = grid.size();
    if v.mode() != VectorMode::Block {
        return Err(Error::InvalidArgument("alltoall requires a block-mode vector".into()));
    }
    let me = grid.linear(ctx.rank().0, ctx.rank().1);
    let offset = v.piece_offset(grid, me);
    let mut batches: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (k, &val) in v.piece(me).iter().enumerate() {
        let pos = offset + k;
        let d = dest(pos, val);
        if d >= p {
            let (di, dj) = (d / grid.pc.max(1), d % grid.pc.max(1));
            return Err(Error::InvalidRank {
                i: di,
                j: dj,
                pr: grid.pr,
                pc: grid.pc,
            });
        }
        batches.entry(d).or_default().push((pos, val));
    }
    let mut kept = batches.remove(&me).unwrap_or_default();
    // Exchange with every other rank; empty batches cost nothing but keep the
    // exchange pattern static.
    for other in 0..p {
        if other == me {
            continue;
        }
        let batch = batches.remove(&other).unwrap_or_default();
        let words = batch.len() as u64;
        let msgs = u64::from(!batch.is_empty());
        ctx.send_to(grid.coords(other), CollectiveKind::Alltoall, msgs, words, batch)?;
    }
    for other in 0..p {
        if other == me {
            continue;
        }
        let batch: Vec<(usize, usize)> = ctx.recv_from(grid.coords(other))?;
        kept.extend(batch);
    }
    kept.sort_unstable();
    Ok(kept)
}
