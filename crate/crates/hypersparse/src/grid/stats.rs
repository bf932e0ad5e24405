//! Per-rank communication and computation accounting.
//!
//! Word convention: a transmitted matrix entry costs 3 words (row, column,
//! value); index-only payloads (vector elements) cost 1 word each. The
//! convention is fixed so that measured counters can be compared against the
//! cost model exactly rather than approximately.

use std::io::Write;

use crate::error::Result;
use crate::grid::GridConfig;
use crate::kernels::FlopCounter;

/// The collective a transfer is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectiveKind {
    Broadcast,
    Scatter,
    Transpose,
    Alltoall,
    PointToPoint,
}

pub const COLLECTIVE_KINDS: [CollectiveKind; 5] = [
    CollectiveKind::Broadcast,
    CollectiveKind::Scatter,
    CollectiveKind::Transpose,
    CollectiveKind::Alltoall,
    CollectiveKind::PointToPoint,
];

impl CollectiveKind {
    pub fn name(self) -> &'static str {
        match self {
            CollectiveKind::Broadcast => "broadcast",
            CollectiveKind::Scatter => "scatter",
            CollectiveKind::Transpose => "transpose",
            CollectiveKind::Alltoall => "alltoall",
            CollectiveKind::PointToPoint => "p2p",
        }
    }

    fn index(self) -> usize {
        match self {
            CollectiveKind::Broadcast => 0,
            CollectiveKind::Scatter => 1,
            CollectiveKind::Transpose => 2,
            CollectiveKind::Alltoall => 3,
            CollectiveKind::PointToPoint => 4,
        }
    }
}

/// Message/word tallies for one direction of one collective kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counter {
    pub messages: u64,
    pub words: u64,
}

/// Everything one rank did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankStats {
    sent: [Counter; 5],
    received: [Counter; 5],
    pub multiplies: u64,
    pub adds: u64,
}

impl RankStats {
    pub(crate) fn record_send(&mut self, kind: CollectiveKind, messages: u64, words: u64) {
        let c = &mut self.sent[kind.index()];
        c.messages += messages;
        c.words += words;
    }

    pub(crate) fn record_recv(&mut self, kind: CollectiveKind, messages: u64, words: u64) {
        let c = &mut self.received[kind.index()];
        c.messages += messages;
        c.words += words;
    }

    pub(crate) fn record_compute(&mut self, fc: FlopCounter) {
        self.multiplies += fc.multiplies;
        self.adds += fc.adds;
    }

    pub fn sent(&self, kind: CollectiveKind) -> Counter {
        self.sent[kind.index()]
    }

    pub fn received(&self, kind: CollectiveKind) -> Counter {
        self.received[kind.index()]
    }

    pub fn total_sent_words(&self) -> u64 {
        self.sent.iter().map(|c| c.words).sum()
    }

    pub fn total_received_words(&self) -> u64 {
        self.received.iter().map(|c| c.words).sum()
    }
}

/// Grid-wide accounting, one slot per rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommStats {
    grid: GridConfig,
    ranks: Vec<RankStats>,
}

impl CommStats {
    pub(crate) fn new(grid: GridConfig, ranks: Vec<RankStats>) -> Self {
        CommStats { grid, ranks }
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    pub fn rank(&self, i: usize, j: usize) -> &RankStats {
        &self.ranks[self.grid.linear(i, j)]
    }

    pub fn ranks(&self) -> &[RankStats] {
        &self.ranks
    }

    pub fn total_sent(&self, kind: CollectiveKind) -> Counter {
        let mut out = Counter::default();
        for r in &self.ranks {
            out.messages += r.sent(kind).messages;
            out.words += r.sent(kind).words;
        }
        out
    }

    pub fn total_received(&self, kind: CollectiveKind) -> Counter {
        let mut out = Counter::default();
        for r in &self.ranks {
            out.messages += r.received(kind).messages;
            out.words += r.received(kind).words;
        }
        out
    }

    pub fn total_multiplies(&self) -> u64 {
        self.ranks.iter().map(|r| r.multiplies).sum()
    }

    pub fn total_adds(&self) -> u64 {
        self.ranks.iter().map(|r| r.adds).sum()
    }

    /// Words sent must equal words received, per collective kind.
    pub fn words_conserved(&self) -> bool {
        COLLECTIVE_KINDS
            .iter()
            .all(|&k| self.total_sent(k).words == self.total_received(k).words)
    }

    /// Merges another run's counters rank by rank (for multi-phase pipelines).
    pub fn absorb(&mut self, other: &CommStats) {
        assert_eq!(self.grid, other.grid);
        for (mine, theirs) in self.ranks.iter_mut().zip(&other.ranks) {
            for k in COLLECTIVE_KINDS {
                mine.record_send(k, theirs.sent(k).messages, theirs.sent(k).words);
                mine.record_recv(k, theirs.received(k).messages, theirs.received(k).words);
            }
            mine.multiplies += theirs.multiplies;
            mine.adds += theirs.adds;
        }
    }

    /// CSV with columns `rank_i,rank_j,collective,messages,words,multiplies,adds`.
    ///
    /// Communication rows carry sent-side message/word counts; one `compute`
    /// row per rank carries the local multiply/add counters.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "rank_i,rank_j,collective,messages,words,multiplies,adds")?;
        for i in 0..self.grid.pr {
            for j in 0..self.grid.pc {
                let r = self.rank(i, j);
                for k in COLLECTIVE_KINDS {
                    let c = r.sent(k);
                    if c.messages > 0 || c.words > 0 {
                        writeln!(out, "{i},{j},{},{},{},0,0", k.name(), c.messages, c.words)?;
                    }
                }
                writeln!(out, "{i},{j},compute,0,0,{},{}", r.multiplies, r.adds)?;
            }
        }
        Ok(())
    }
}
