//! Benchmark experiment pipelines.
//!
//! Each experiment builds seeded inputs, runs a distributed pipeline on the
//! simulated grid, cross-checks the gathered result against the sequential
//! path, and reports a CSV of per-rank counters plus a summary row. Wall-clock
//! time is reported but never checked: the asserted columns are counters only,
//! and a failed cross-check is the only thing that fails an experiment.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use crate::csc::CscMatrix;
use crate::dcsc::DcscMatrix;
use crate::error::{Error, Result};
use crate::generators::{
    diagonal_entries, erdos_renyi, random_permutation, random_symmetric_permutation, restriction_operator, rmat,
    split_diagonal, RmatParams,
};
use crate::grid::{distribute, gather, CommStats, ExecMode, GridConfig, LatencyModel, RunOpts,
    COLLECTIVE_KINDS};
use crate::indexing::{spasgn, spasgn_dist, spref, spref_dist, EvalOrder, IndexVector};
use crate::io::{read_matrix_market, write_matrix_market};
use crate::kernels::{columnwise_spgemm, count_flops, scale_columns, sparse_add};
use crate::semiring::PlusTimes;
use crate::summa::{predict_costs, sparse_summa_with, SummaPlan};
use crate::grid::VectorMode;

/// Experiment shapes runnable from the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Spgemm,
    SprefPermute,
    SprefSubgraphs,
    Spasgn,
    Restriction,
    TallSkinny,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Spgemm => "spgemm",
            ExperimentKind::SprefPermute => "spref-permute",
            ExperimentKind::SprefSubgraphs => "spref-subgraphs",
            ExperimentKind::Spasgn => "spasgn",
            ExperimentKind::Restriction => "restriction",
            ExperimentKind::TallSkinny => "tall-skinny",
        }
    }
}

/// Fully-resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub scale: u32,
    pub grid: GridConfig,
    /// `None` picks the largest legal blocking parameter.
    pub blocking: Option<usize>,
    pub seed: u64,
    /// Restriction order.
    pub order: usize,
    /// Generator nonzeros per column for the left operand.
    pub nnz_per_col: usize,
    /// Tall-skinny right-hand-side nonzeros per column.
    pub d2: usize,
    /// Tall-skinny aspect ratio `n / k`.
    pub aspect: usize,
    /// Number of induced subgraphs extracted by `spref-subgraphs`.
    pub chunks: usize,
    pub mode: ExecMode,
    pub latency: LatencyModel,
    pub eval_order: EvalOrder,
    /// Apply the random symmetric permutation to generated inputs.
    pub permute: bool,
    /// Load the left operand from a Matrix Market file instead of generating.
    pub input: Option<PathBuf>,
    /// Write generated inputs as Matrix Market files into this directory.
    pub dump_inputs: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, scale: u32, grid: GridConfig) -> Self {
        ExperimentSpec {
            kind,
            scale,
            grid,
            blocking: None,
            seed: 1,
            order: 2,
            nnz_per_col: 8,
            d2: 8,
            aspect: 64,
            chunks: 10,
            mode: ExecMode::Sequential,
            latency: LatencyModel::Flat,
            eval_order: EvalOrder::LeftToRight,
            permute: true,
            input: None,
            dump_inputs: None,
        }
    }

    fn opts(&self) -> RunOpts {
        RunOpts {
            mode: self.mode,
            latency: self.latency,
            merge_threshold: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(path) = &self.input {
            if !path.exists() {
                return Err(Error::InvalidArgument(format!(
                    "input file {} does not exist",
                    path.display()
                )));
            }
        }
        if self.kind == ExperimentKind::Restriction && self.order == 0 {
            return Err(Error::OrderDoesNotDivide { order: 0, n: 1 << self.scale });
        }
        Ok(())
    }
}

/// Counter summary in the statistics-table shape.
#[derive(Debug, Clone, Copy, Default)]
pub struct Summary {
    pub nnz_a: usize,
    pub nnz_b: usize,
    pub nnz_c: usize,
    /// Requested (pre-collapse) nonzeros of generated inputs, where known.
    pub requested_nnz_a: Option<usize>,
    pub multiplies: u64,
    pub adds: u64,
    pub flops_predicted: u64,
    pub wall_ms: f64,
}

/// The outcome of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub passed: bool,
    pub summary: Summary,
    pub failures: Vec<String>,
    pub csv: String,
}

const CSV_HEADER: &str =
    "section,stage,rank_i,rank_j,collective,messages,words,multiplies,adds,nnz_a,nnz_b,nnz_c,flops,wall_ms,status";

struct ReportBuilder {
    csv: String,
    failures: Vec<String>,
}

impl ReportBuilder {
    fn new() -> Self {
        ReportBuilder {
            csv: format!("{CSV_HEADER}\n"),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: &str) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn comm_rows(&mut self, stage: &str, stats: &CommStats) {
        let grid = stats.grid();
        for i in 0..grid.pr {
            for j in 0..grid.pc {
                let r = stats.rank(i, j);
                for k in COLLECTIVE_KINDS {
                    let c = r.sent(k);
                    if c.messages > 0 || c.words > 0 {
                        let _ = writeln!(
                            self.csv,
                            "comm,{stage},{i},{j},{},{},{},,,,,,,,",
                            k.name(),
                            c.messages,
                            c.words
                        );
                    }
                }
                let _ = writeln!(
                    self.csv,
                    "comm,{stage},{i},{j},compute,0,0,{},{},,,,,,",
                    r.multiplies, r.adds
                );
            }
        }
        if !stats.words_conserved() {
            self.failures.push(format!("stage {stage}: sent/received word totals differ"));
        }
    }

    fn model_rows(&mut self, stage: &str, nnz_a: usize, nnz_b: usize, n: usize, d: f64, p: usize, blk: usize) {
        if let Ok(model) = predict_costs(nnz_a, nnz_b, n, d, p, blk) {
            let _ = writeln!(
                self.csv,
                "model,{stage},-1,-1,model_broadcast,{},{},,,,,,,,",
                model.per_rank_msgs_recv, model.per_rank_bcast_words
            );
            let _ = writeln!(
                self.csv,
                "model,{stage},-1,-1,model_compute,0,0,{},,,,,,,",
                model.comp_mult_term
            );
        }
    }

    fn finish(mut self, kind: ExperimentKind, summary: Summary) -> ExperimentReport {
        let status = if self.failures.is_empty() { "pass" } else { "fail" };
        let _ = writeln!(
            self.csv,
            "summary,{},,,,,,{},{},{},{},{},{},,{status}",
            kind.name(),
            summary.multiplies,
            summary.adds,
            summary.nnz_a,
            summary.nnz_b,
            summary.nnz_c,
            summary.flops_predicted,
        );
        let _ = writeln!(self.csv, "timing,total,,,,,,,,,,,,{:.3},", summary.wall_ms);
        ExperimentReport {
            passed: self.failures.is_empty(),
            summary,
            failures: self.failures,
            csv: self.csv,
        }
    }
}

fn bits_multiset(a: &CscMatrix<f64>) -> Vec<u64> {
    let mut v: Vec<u64> = a.num().iter().map(|x| x.to_bits()).collect();
    v.sort_unstable();
    v
}

fn approx_equal(a: &CscMatrix<f64>, b: &CscMatrix<f64>, rel_tol: f64) -> bool {
    if a.rows() != b.rows() || a.cols() != b.cols() || a.nnz() != b.nnz() {
        return false;
    }
    if a.cp() != b.cp() || a.ir() != b.ir() {
        return false;
    }
    a.num()
        .iter()
        .zip(b.num())
        .all(|(&x, &y)| x == y || (x - y).abs() <= rel_tol * x.abs().max(y.abs()))
}

/// Left operand: loaded from file or generated; optionally permuted.
fn build_left(spec: &ExperimentSpec) -> Result<(CscMatrix<f64>, Option<usize>, Option<Vec<usize>>)> {
    let (a, requested) = match &spec.input {
        Some(path) => (read_matrix_market(path)?, None),
        None => {
            let params = RmatParams {
                nnz_per_col: spec.nnz_per_col,
                ..RmatParams::new(spec.scale, spec.seed)
            };
            let a = rmat(&params)?;
            (a, Some(params.insertions()))
        }
    };
    if spec.permute && a.rows() == a.cols() {
        let (p_a_pt, perm) = random_symmetric_permutation(&a, spec.seed.wrapping_add(100))?;
        Ok((p_a_pt, requested, Some(perm)))
    } else {
        Ok((a, requested, None))
    }
}

fn dump(spec: &ExperimentSpec, name: &str, m: &CscMatrix<f64>) -> Result<()> {
    if let Some(dir) = &spec.dump_inputs {
        std::fs::create_dir_all(dir)?;
        write_matrix_market(m, dir.join(name))?;
    }
    Ok(())
}

/// Runs one experiment end to end.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::Spgemm => run_spgemm(spec),
        ExperimentKind::SprefPermute => run_spref_permute(spec),
        ExperimentKind::SprefSubgraphs => run_spref_subgraphs(spec),
        ExperimentKind::Spasgn => run_spasgn(spec),
        ExperimentKind::Restriction => run_restriction(spec),
        ExperimentKind::TallSkinny => run_tall_skinny(spec),
    }
}

fn run_spgemm(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut rb = ReportBuilder::new();
    let (a, requested, perm) = build_left(spec)?;
    let b = match (&spec.input, &perm) {
        (Some(_), _) => a.clone(),
        (None, perm) => {
            let params = RmatParams {
                nnz_per_col: spec.nnz_per_col,
                ..RmatParams::new(spec.scale, spec.seed.wrapping_add(1))
            };
            let raw = rmat(&params)?;
            match perm {
                // Same permutation on both operands: P C P^T = (P A P^T)(P B P^T).
                Some(p) => crate::generators::apply_symmetric_permutation(&raw, p)?,
                None => raw,
            }
        }
    };
    dump(spec, "A.mtx", &a)?;
    dump(spec, "B.mtx", &b)?;

    let blk = match spec.blocking {
        Some(b) => b,
        None => SummaPlan::max_blocking(spec.grid, a.cols()).ok_or(Error::GridDoesNotTile {
            pr: spec.grid.pr,
            pc: spec.grid.pc,
            k: a.cols(),
        })?,
    };
    let da = distribute(&a, spec.grid);
    let db = distribute(&b, spec.grid);
    let started = Instant::now();
    let (c_dist, stats) = sparse_summa_with(&da, &db, blk, &PlusTimes, spec.opts())?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let c = gather(&c_dist, &PlusTimes);

    let (want, _) = columnwise_spgemm(&a, &b, &PlusTimes)?;
    rb.check(c == want, "distributed product equals sequential product");
    let flops = count_flops(&DcscMatrix::from_csc(&a), &DcscMatrix::from_csc(&b))?;
    rb.check(
        stats.total_multiplies() == flops,
        "multiply counters equal the flop count",
    );
    rb.comm_rows("summa", &stats);
    rb.model_rows(
        "summa",
        a.nnz(),
        b.nnz(),
        a.cols(),
        spec.nnz_per_col as f64,
        spec.grid.size(),
        blk,
    );
    let summary = Summary {
        nnz_a: a.nnz(),
        nnz_b: b.nnz(),
        nnz_c: c.nnz(),
        requested_nnz_a: requested,
        multiplies: stats.total_multiplies(),
        adds: stats.total_adds(),
        flops_predicted: flops,
        wall_ms,
    };
    Ok(rb.finish(spec.kind, summary))
}

fn run_spref_permute(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut rb = ReportBuilder::new();
    let (a, requested, _) = build_left(spec)?;
    dump(spec, "A.mtx", &a)?;
    let perm = random_permutation(a.rows(), spec.seed.wrapping_add(1));
    let iv = IndexVector::new(perm);

    let da = distribute(&a, spec.grid);
    let started = Instant::now();
    let (b_dist, stats) = spref_dist(
        &da,
        &iv,
        &iv,
        &PlusTimes,
        spec.opts(),
        spec.eval_order,
        VectorMode::Diagonal,
    )?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let b = gather(&b_dist, &PlusTimes);

    let want = spref(&a, &iv, &iv, &PlusTimes)?;
    rb.check(b == want, "distributed extraction equals sequential extraction");
    rb.check(b.nnz() == a.nnz(), "permutation preserves the nonzero count");
    rb.check(
        bits_multiset(&b) == bits_multiset(&a),
        "permutation preserves the value multiset",
    );
    rb.comm_rows("spref", &stats);
    let summary = Summary {
        nnz_a: a.nnz(),
        nnz_b: 0,
        nnz_c: b.nnz(),
        requested_nnz_a: requested,
        multiplies: stats.total_multiplies(),
        adds: stats.total_adds(),
        flops_predicted: 2 * a.nnz() as u64,
        wall_ms,
    };
    Ok(rb.finish(spec.kind, summary))
}

fn run_spref_subgraphs(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut rb = ReportBuilder::new();
    let (a, requested, _) = build_left(spec)?;
    dump(spec, "A.mtx", &a)?;
    let perm = random_permutation(a.rows(), spec.seed.wrapping_add(1));
    let k = spec.chunks.max(1);
    let chunk_len = a.rows().div_ceil(k);

    let da = distribute(&a, spec.grid);
    let mut union_nnz = 0usize;
    let mut total_stats: Option<CommStats> = None;
    let started = Instant::now();
    for (idx, chunk) in perm.chunks(chunk_len).enumerate() {
        let iv = IndexVector::new(chunk.to_vec());
        let (b_dist, stats) = spref_dist(
            &da,
            &iv,
            &iv,
            &PlusTimes,
            spec.opts(),
            spec.eval_order,
            VectorMode::Diagonal,
        )?;
        let b = gather(&b_dist, &PlusTimes);
        let want = spref(&a, &iv, &iv, &PlusTimes)?;
        rb.check(b == want, &format!("subgraph {idx} equals sequential extraction"));
        union_nnz += b.nnz();
        rb.comm_rows(&format!("spref{idx}"), &stats);
        match &mut total_stats {
            None => total_stats = Some(stats),
            Some(t) => t.absorb(&stats),
        }
    }
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    rb.check(
        union_nnz <= a.nnz(),
        "induced subgraphs keep at most nnz(A) entries in total",
    );
    let stats = total_stats.expect("at least one chunk");
    let summary = Summary {
        nnz_a: a.nnz(),
        nnz_b: 0,
        nnz_c: union_nnz,
        requested_nnz_a: requested,
        multiplies: stats.total_multiplies(),
        adds: stats.total_adds(),
        flops_predicted: 2 * a.nnz() as u64,
        wall_ms,
    };
    Ok(rb.finish(spec.kind, summary))
}

fn run_spasgn(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut rb = ReportBuilder::new();
    if spec.scale == 0 {
        return Err(Error::InvalidArgument("spasgn experiment needs scale >= 1".into()));
    }
    let (a, requested, _) = build_left(spec)?;
    let b_params = RmatParams {
        nnz_per_col: spec.nnz_per_col,
        ..RmatParams::new(spec.scale - 1, spec.seed.wrapping_add(1))
    };
    let b = rmat(&b_params)?;
    dump(spec, "A.mtx", &a)?;
    dump(spec, "B.mtx", &b)?;

    let perm = random_permutation(a.rows(), spec.seed.wrapping_add(2));
    let iv = IndexVector::new(perm[..b.rows()].to_vec());

    let da = distribute(&a, spec.grid);
    let db = distribute(&b, spec.grid);
    let started = Instant::now();
    let (c_dist, stats) = spasgn_dist(&da, &iv, &iv, &db, &PlusTimes, spec.opts(), VectorMode::Diagonal)?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let c = gather(&c_dist, &PlusTimes);

    let want = spasgn(&a, &iv, &iv, &b, &PlusTimes)?;
    rb.check(c == want, "distributed assignment equals sequential assignment");

    // Frame rule: entries outside rows I and columns J are untouched.
    let in_i: std::collections::HashSet<usize> = iv.entries().iter().copied().collect();
    let frame_ok = a
        .iter_entries()
        .filter(|&(r, c2, _)| !(in_i.contains(&r) && in_i.contains(&c2)))
        .all(|(r, c2, v)| {
            c.col(c2)
                .0
                .iter()
                .zip(c.col(c2).1)
                .any(|(&rr, &vv)| rr == r && vv.to_bits() == v.to_bits())
        });
    rb.check(frame_ok, "entries outside the assigned region are bit-identical");
    rb.comm_rows("spasgn", &stats);
    let summary = Summary {
        nnz_a: a.nnz(),
        nnz_b: b.nnz(),
        nnz_c: c.nnz(),
        requested_nnz_a: requested,
        multiplies: stats.total_multiplies(),
        adds: stats.total_adds(),
        flops_predicted: 2 * (a.nnz() + b.nnz() + 2 * iv.len()) as u64,
        wall_ms,
    };
    Ok(rb.finish(spec.kind, summary))
}

fn run_restriction(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut rb = ReportBuilder::new();
    let (a, requested, _) = build_left(spec)?;
    let n = a.cols();
    let s = restriction_operator(n, spec.order, spec.seed.wrapping_add(1))?;
    dump(spec, "A.mtx", &a)?;
    dump(spec, "S.mtx", &s)?;
    rb.check(s.nnz() == n, "restriction operator has exactly n nonzeros");
    let s_t = DcscMatrix::from_csc(&s).transpose().to_csc();

    // Sequential references for both parenthesizations.
    let (sa_seq, _) = columnwise_spgemm(&s, &a, &PlusTimes)?;
    let (lr_seq, _) = columnwise_spgemm(&sa_seq, &s_t, &PlusTimes)?;
    let (ast_seq, _) = columnwise_spgemm(&a, &s_t, &PlusTimes)?;
    let (rl_seq, _) = columnwise_spgemm(&s, &ast_seq, &PlusTimes)?;
    rb.check(
        approx_equal(&lr_seq, &rl_seq, 1e-12),
        "both parenthesizations of the triple product agree",
    );

    // Diagonal splitting: S*A = scale-columns(S, diag(D)) + S*L.
    let (d_part, l_part) = split_diagonal(&a)?;
    let scaled = scale_columns(&DcscMatrix::from_csc(&s), &diagonal_entries(&d_part), &PlusTimes);
    let (sl, _) = columnwise_spgemm(&s, &l_part, &PlusTimes)?;
    let via_split = sparse_add(&scaled, &DcscMatrix::from_csc(&sl), &PlusTimes)?.to_csc();
    rb.check(
        approx_equal(&via_split, &sa_seq, 1e-12),
        "diagonal-split path reproduces S*A",
    );

    // Distributed run in the requested evaluation order.
    let da = distribute(&a, spec.grid);
    let ds = distribute(&s, spec.grid);
    let dst = distribute(&s_t, spec.grid);
    let started = Instant::now();
    let (got, stats, want) = match spec.eval_order {
        EvalOrder::LeftToRight => {
            let (sa, st1) = sparse_summa_with(&ds, &da, pick_blk(spec, n)?, &PlusTimes, spec.opts())?;
            let (sast, mut st2) = sparse_summa_with(&sa, &dst, pick_blk(spec, n)?, &PlusTimes, spec.opts())?;
            st2.absorb(&st1);
            (gather(&sast, &PlusTimes), st2, &lr_seq)
        }
        EvalOrder::RightToLeft => {
            let (ast, st1) = sparse_summa_with(&da, &dst, pick_blk(spec, n)?, &PlusTimes, spec.opts())?;
            let (sast, mut st2) = sparse_summa_with(&ds, &ast, pick_blk(spec, n)?, &PlusTimes, spec.opts())?;
            st2.absorb(&st1);
            (gather(&sast, &PlusTimes), st2, &rl_seq)
        }
    };
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    rb.check(&got == want, "distributed contraction equals sequential contraction");
    rb.comm_rows("contraction", &stats);
    let summary = Summary {
        nnz_a: a.nnz(),
        nnz_b: s.nnz(),
        nnz_c: got.nnz(),
        requested_nnz_a: requested,
        multiplies: stats.total_multiplies(),
        adds: stats.total_adds(),
        flops_predicted: 2 * a.nnz() as u64,
        wall_ms,
    };
    Ok(rb.finish(spec.kind, summary))
}

fn pick_blk(spec: &ExperimentSpec, inner: usize) -> Result<usize> {
    match spec.blocking {
        Some(b) => Ok(b),
        None => SummaPlan::max_blocking(spec.grid, inner).ok_or(Error::GridDoesNotTile {
            pr: spec.grid.pr,
            pc: spec.grid.pc,
            k: inner,
        }),
    }
}

fn run_tall_skinny(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut rb = ReportBuilder::new();
    let (a, requested, _) = build_left(spec)?;
    let n = a.cols();
    let k = (n / spec.aspect.max(1)).max(spec.grid.pc);
    let b = erdos_renyi(n, k, spec.d2.min(n), spec.seed.wrapping_add(1))?;
    dump(spec, "A.mtx", &a)?;
    dump(spec, "B.mtx", &b)?;

    let da = distribute(&a, spec.grid);
    let db = distribute(&b, spec.grid);
    let blk = pick_blk(spec, n)?;
    let started = Instant::now();
    let (c_dist, stats) = sparse_summa_with(&da, &db, blk, &PlusTimes, spec.opts())?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let c = gather(&c_dist, &PlusTimes);
    let (want, _) = columnwise_spgemm(&a, &b, &PlusTimes)?;
    rb.check(c == want, "distributed product equals sequential product");
    rb.comm_rows("summa", &stats);
    rb.model_rows("summa", a.nnz(), b.nnz(), n, spec.nnz_per_col as f64, spec.grid.size(), blk);
    let flops = count_flops(&DcscMatrix::from_csc(&a), &DcscMatrix::from_csc(&b))?;
    let summary = Summary {
        nnz_a: a.nnz(),
        nnz_b: b.nnz(),
        nnz_c: c.nnz(),
        requested_nnz_a: requested,
        multiplies: stats.total_multiplies(),
        adds: stats.total_adds(),
        flops_predicted: flops,
        wall_ms,
    };
    Ok(rb.finish(spec.kind, summary))
}
