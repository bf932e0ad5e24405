//! Deterministic SPMD execution.
//!
//! Every rank runs the same program against its own [`RankCtx`]; messages move
//! by value through per-channel FIFO mailboxes and every receive names its
//! source, so what a rank computes can never depend on scheduling. Two
//! execution modes are offered:
//!
//! - `Sequential`: one rank runs at a time, round-robin, handing off whenever
//!   it blocks on an unavailable message (a cooperative superstep schedule);
//! - `Concurrent`: all ranks run on their own threads, blocking on their
//!   mailboxes.
//!
//! Both produce bit-identical per-rank results and counters. If every
//! unfinished rank is blocked on a message that was never sent, the run aborts
//! with a diagnostic naming the blocked ranks.

use std::any::Any;
use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};

use crate::error::{Error, Result};
use crate::grid::stats::{CollectiveKind, CommStats, RankStats};
use crate::grid::GridConfig;
use crate::kernels::FlopCounter;

/// How ranks are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Round-robin supersteps on one runnable rank at a time.
    #[default]
    Sequential,
    /// Free-running rank threads with mailbox channels.
    Concurrent,
}

/// How collective latency is charged (and, for broadcast, routed): a flat
/// star from the root, or a binomial tree. Word totals are identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatencyModel {
    #[default]
    Flat,
    Tree,
}

/// Options shared by the distributed operations.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOpts {
    pub mode: ExecMode,
    pub latency: LatencyModel,
    /// Deferred-merge threshold for stage accumulation; `None` picks
    /// `16 * max(nnz(A), nnz(B))`.
    pub merge_threshold: Option<usize>,
}

struct Envelope {
    payload: Box<dyn Any + Send>,
    words: u64,
    kind: CollectiveKind,
}

struct RouterState {
    /// FIFO queue per ordered (src, dst) pair, indexed `src * p + dst`.
    queues: Vec<VecDeque<Envelope>>,
    /// `Some(src)` while a rank is blocked receiving from `src`.
    waiting: Vec<Option<usize>>,
    finished: Vec<bool>,
    /// Sequential mode: the rank currently allowed to run.
    token: usize,
    deadlock: Option<String>,
}

impl RouterState {
    fn queue_idx(&self, p: usize, src: usize, dst: usize) -> usize {
        debug_assert!(src < p && dst < p);
        src * p + dst
    }

    fn has_message(&self, p: usize, src: usize, dst: usize) -> bool {
        !self.queues[src * p + dst].is_empty()
    }

    fn runnable(&self, p: usize, r: usize) -> bool {
        !self.finished[r]
            && match self.waiting[r] {
                None => true,
                Some(src) => self.has_message(p, src, r),
            }
    }

    /// Sequential mode: pass the token to the next runnable rank after `from`.
    /// Declares deadlock if nobody can run but some rank is unfinished.
    fn advance_token(&mut self, grid: GridConfig, from: usize) {
        let p = grid.size();
        for step in 1..=p {
            let r = (from + step) % p;
            if self.runnable(p, r) {
                self.token = r;
                return;
            }
        }
        if self.finished.iter().all(|&f| f) {
            self.token = usize::MAX;
        } else {
            self.declare_deadlock(grid);
        }
    }

    /// Concurrent mode: deadlock when every unfinished rank waits on an empty
    /// channel.
    fn check_deadlock(&mut self, grid: GridConfig) {
        let p = grid.size();
        let stuck = (0..p).all(|r| self.finished[r] || !self.runnable(p, r));
        let unfinished = self.finished.iter().any(|&f| !f);
        if stuck && unfinished {
            self.declare_deadlock(grid);
        }
    }

    fn declare_deadlock(&mut self, grid: GridConfig) {
        let mut parts = Vec::new();
        for (r, w) in self.waiting.iter().enumerate() {
            if self.finished[r] {
                continue;
            }
            if let Some(src) = w {
                let (i, j) = grid.coords(r);
                let (si, sj) = grid.coords(*src);
                parts.push(format!("rank ({i},{j}) blocked receiving from ({si},{sj})"));
            }
        }
        self.deadlock = Some(parts.join("; "));
    }
}

struct Shared {
    grid: GridConfig,
    mode: ExecMode,
    state: Mutex<RouterState>,
    cv: Condvar,
}

/// Per-rank execution context handed to SPMD programs.
pub struct RankCtx<'a> {
    i: usize,
    j: usize,
    me: usize,
    shared: &'a Shared,
    opts: RunOpts,
    stats: RankStats,
}

impl RankCtx<'_> {
    pub fn grid(&self) -> GridConfig {
        self.shared.grid
    }

    pub fn rank(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn row(&self) -> usize {
        self.i
    }

    pub fn col(&self) -> usize {
        self.j
    }

    pub fn opts(&self) -> RunOpts {
        self.opts
    }

    pub fn latency(&self) -> LatencyModel {
        self.opts.latency
    }

    /// Adds local kernel work to this rank's counters.
    pub fn record_compute(&mut self, fc: FlopCounter) {
        self.stats.record_compute(fc);
    }

    pub fn stats(&self) -> &RankStats {
        &self.stats
    }

    /// Sends a message; never blocks. `words` is the payload's accounting
    /// size, `messages` the latency charge (usually 1; collectives may charge
    /// modeled rounds).
    pub fn send_to<M: Any + Send>(
        &mut self,
        dst: (usize, usize),
        kind: CollectiveKind,
        messages: u64,
        words: u64,
        msg: M,
    ) -> Result<()> {
        let grid = self.shared.grid;
        if dst.0 >= grid.pr || dst.1 >= grid.pc {
            return Err(Error::InvalidRank {
                i: dst.0,
                j: dst.1,
                pr: grid.pr,
                pc: grid.pc,
            });
        }
        let dst_lin = grid.linear(dst.0, dst.1);
        self.stats.record_send(kind, messages, words);
        let mut st = self.shared.state.lock().unwrap();
        let idx = st.queue_idx(grid.size(), self.me, dst_lin);
        st.queues[idx].push_back(Envelope {
            payload: Box::new(msg),
            words,
            kind,
        });
        // A rank blocked on this channel is runnable again.
        self.shared.cv.notify_all();
        Ok(())
    }

    /// Receives the next message from `src`, blocking until it arrives.
    pub fn recv_from<M: Any + Send>(&mut self, src: (usize, usize)) -> Result<M> {
        let grid = self.shared.grid;
        if src.0 >= grid.pr || src.1 >= grid.pc {
            return Err(Error::InvalidRank {
                i: src.0,
                j: src.1,
                pr: grid.pr,
                pc: grid.pc,
            });
        }
        let src_lin = grid.linear(src.0, src.1);
        let p = grid.size();
        let mut st = self.shared.state.lock().unwrap();
        loop {
            if let Some(msg) = st.deadlock.clone() {
                return Err(Error::Deadlock(msg));
            }
            let available = st.has_message(p, src_lin, self.me);
            let may_run = match self.shared.mode {
                ExecMode::Sequential => st.token == self.me,
                ExecMode::Concurrent => true,
            };
            if available && may_run {
                st.waiting[self.me] = None;
                let idx = st.queue_idx(p, src_lin, self.me);
                let env = st.queues[idx].pop_front().unwrap();
                self.stats.record_recv(env.kind, 1, env.words);
                drop(st);
                let msg = env
                    .payload
                    .downcast::<M>()
                    .expect("mismatched message type between send and recv");
                return Ok(*msg);
            }
            st.waiting[self.me] = Some(src_lin);
            match self.shared.mode {
                ExecMode::Sequential => {
                    if st.token == self.me {
                        st.advance_token(grid, self.me);
                        self.shared.cv.notify_all();
                    }
                }
                ExecMode::Concurrent => {
                    st.check_deadlock(grid);
                    if st.deadlock.is_some() {
                        self.shared.cv.notify_all();
                    }
                }
            }
            st = self.shared.cv.wait(st).unwrap();
        }
    }
}

/// Runs `program` on every rank of `grid` and returns the per-rank results in
/// row-major rank order together with the communication statistics.
pub fn run_spmd<R, F>(grid: GridConfig, opts: RunOpts, program: F) -> Result<(Vec<R>, CommStats)>
where
    R: Send,
    F: Fn(&mut RankCtx<'_>) -> Result<R> + Send + Sync,
{
    let p = grid.size();
    let shared = Shared {
        grid,
        mode: opts.mode,
        state: Mutex::new(RouterState {
            queues: (0..p * p).map(|_| VecDeque::new()).collect(),
            waiting: vec![None; p],
            finished: vec![false; p],
            token: 0,
            deadlock: None,
        }),
        cv: Condvar::new(),
    };

    let mut outcomes: Vec<(Result<R>, RankStats)> = Vec::with_capacity(p);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(p);
        for me in 0..p {
            let shared = &shared;
            let program = &program;
            handles.push(scope.spawn(move || {
                let (i, j) = grid.coords(me);
                let mut ctx = RankCtx {
                    i,
                    j,
                    me,
                    shared,
                    opts,
                    stats: RankStats::default(),
                };
                // Sequential mode: wait for the round-robin token.
                if shared.mode == ExecMode::Sequential {
                    let mut st = shared.state.lock().unwrap();
                    while st.token != me && st.deadlock.is_none() {
                        st = shared.cv.wait(st).unwrap();
                    }
                }
                let result = program(&mut ctx);
                let mut st = shared.state.lock().unwrap();
                st.finished[me] = true;
                st.waiting[me] = None;
                match shared.mode {
                    ExecMode::Sequential => {
                        if st.token == me {
                            st.advance_token(grid, me);
                        }
                    }
                    ExecMode::Concurrent => st.check_deadlock(grid),
                }
                shared.cv.notify_all();
                drop(st);
                (result, ctx.stats)
            }));
        }
        for h in handles {
            outcomes.push(h.join().expect("rank thread panicked"));
        }
    });

    let mut results = Vec::with_capacity(p);
    let mut stats = Vec::with_capacity(p);
    let mut first_err: Option<Error> = None;
    for (res, st) in outcomes {
        stats.push(st);
        match res {
            Ok(v) => results.push(v),
            Err(e) => {
                // Prefer a root-cause error over the deadlock cascade it
                // triggers on the other ranks.
                let replace = match (&first_err, &e) {
                    (None, _) => true,
                    (Some(Error::Deadlock(_)), Error::Deadlock(_)) => false,
                    (Some(Error::Deadlock(_)), _) => true,
                    _ => false,
                };
                if replace {
                    first_err = Some(e);
                }
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    Ok((results, CommStats::new(grid, stats)))
}
