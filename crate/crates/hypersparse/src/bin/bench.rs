//! Benchmark harness: runs one experiment on the simulated grid, cross-checks
//! it against the sequential path, and writes a CSV report. Exit status 0
//! means the cross-check passed, 1 means it failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hypersparse::experiment::{run_experiment, ExperimentKind, ExperimentSpec};
use hypersparse::grid::{ExecMode, GridConfig, LatencyModel};
use hypersparse::indexing::EvalOrder;

#[derive(Parser)]
#[command(
    name = "bench",
    about = "Sparse matrix benchmark harness on a simulated 2D process grid",
    version
)]
struct Cli {
    #[command(subcommand)]
    kind: Kind,
}

#[derive(Subcommand)]
enum Kind {
    /// Square product of two generated matrices.
    Spgemm(Common),
    /// Random symmetric permutation applied as an extraction.
    SprefPermute(Common),
    /// Extraction of induced subgraphs from a chunked permutation.
    SprefSubgraphs(Common),
    /// Replacement of a region of the graph with a smaller generated graph.
    Spasgn(Common),
    /// Graph contraction via the restriction triple product.
    Restriction(Common),
    /// Product with a tall-skinny uniform right-hand side.
    TallSkinny(Common),
}

#[derive(Args)]
struct Common {
    /// Generator scale; matrices are 2^scale square.
    #[arg(long, default_value_t = 10)]
    scale: u32,

    /// Process grid as PRxPC, e.g. 2x2 or 4x2.
    #[arg(long, default_value = "2x2", value_parser = parse_grid)]
    grid: GridConfig,

    /// SUMMA blocking parameter; "max" picks the largest legal value.
    #[arg(long, default_value = "max")]
    blocking: String,

    /// Generator seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Restriction order (restriction experiment).
    #[arg(long, default_value_t = 2)]
    order: usize,

    /// Nonzeros per column for generated left operands.
    #[arg(long, default_value_t = 8)]
    nnz_per_col: usize,

    /// Nonzeros per column of the tall-skinny right-hand side.
    #[arg(long, default_value_t = 8)]
    d2: usize,

    /// Aspect ratio n/k of the tall-skinny right-hand side.
    #[arg(long, default_value_t = 64)]
    aspect: usize,

    /// Number of induced subgraphs (spref-subgraphs experiment).
    #[arg(long, default_value_t = 10)]
    chunks: usize,

    /// CSV report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Rank scheduling mode.
    #[arg(long, value_enum, default_value_t = ModeArg::Seq)]
    mode: ModeArg,

    /// Triple-product evaluation order.
    #[arg(long, value_enum, default_value_t = EvalArg::Lr)]
    eval_order: EvalArg,

    /// Collective latency model.
    #[arg(long, value_enum, default_value_t = LatencyArg::Flat)]
    latency: LatencyArg,

    /// Skip the random symmetric permutation of generated inputs.
    #[arg(long)]
    no_permute: bool,

    /// Read the left operand from a Matrix Market file instead of generating.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Write generated inputs as Matrix Market files into this directory.
    #[arg(long)]
    dump_inputs: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Seq,
    Conc,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalArg {
    Lr,
    Rl,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatencyArg {
    Flat,
    Tree,
}

fn parse_grid(text: &str) -> Result<GridConfig, String> {
    let (pr, pc) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected PRxPC, got `{text}`"))?;
    let pr: usize = pr.trim().parse().map_err(|_| format!("bad grid rows `{pr}`"))?;
    let pc: usize = pc.trim().parse().map_err(|_| format!("bad grid cols `{pc}`"))?;
    if pr == 0 || pc == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok(GridConfig::new(pr, pc))
}

fn to_spec(kind: ExperimentKind, c: &Common) -> Result<ExperimentSpec, String> {
    let mut spec = ExperimentSpec::new(kind, c.scale, c.grid);
    spec.seed = c.seed;
    spec.order = c.order;
    spec.nnz_per_col = c.nnz_per_col;
    spec.d2 = c.d2;
    spec.aspect = c.aspect;
    spec.chunks = c.chunks;
    spec.mode = match c.mode {
        ModeArg::Seq => ExecMode::Sequential,
        ModeArg::Conc => ExecMode::Concurrent,
    };
    spec.latency = match c.latency {
        LatencyArg::Flat => LatencyModel::Flat,
        LatencyArg::Tree => LatencyModel::Tree,
    };
    spec.eval_order = match c.eval_order {
        EvalArg::Lr => EvalOrder::LeftToRight,
        EvalArg::Rl => EvalOrder::RightToLeft,
    };
    spec.permute = !c.no_permute;
    spec.input = c.input.clone();
    spec.dump_inputs = c.dump_inputs.clone();
    spec.blocking = match c.blocking.as_str() {
        "max" => None,
        other => Some(
            other
                .parse()
                .map_err(|_| format!("--blocking expects a positive integer or `max`, got `{other}`"))?,
        ),
    };
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match &cli.kind {
        Kind::Spgemm(c) => (ExperimentKind::Spgemm, c),
        Kind::SprefPermute(c) => (ExperimentKind::SprefPermute, c),
        Kind::SprefSubgraphs(c) => (ExperimentKind::SprefSubgraphs, c),
        Kind::Spasgn(c) => (ExperimentKind::Spasgn, c),
        Kind::Restriction(c) => (ExperimentKind::Restriction, c),
        Kind::TallSkinny(c) => (ExperimentKind::TallSkinny, c),
    };
    let spec = match to_spec(kind, common) {
        Ok(spec) => spec,
        Err(msg) => {
            eprintln!("bench: {msg}");
            return ExitCode::from(2);
        }
    };

    let report = match run_experiment(&spec) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("bench: {e}");
            return ExitCode::from(2);
        }
    };

    if let Some(path) = &common.out {
        if let Err(e) = std::fs::write(path, &report.csv) {
            eprintln!("bench: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    } else {
        print!("{}", report.csv);
    }

    let s = &report.summary;
    eprintln!(
        "{}: nnz(A)={} nnz(B)={} nnz(C)={} multiplies={} adds={} wall={:.1}ms{}",
        kind.name(),
        s.nnz_a,
        s.nnz_b,
        s.nnz_c,
        s.multiplies,
        s.adds,
        s.wall_ms,
        if report.passed { " [ok]" } else { " [CHECK FAILED]" }
    );
    if report.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("cross-check failures:");
        for f in &report.failures {
            eprintln!("  - {f}");
        }
        ExitCode::FAILURE
    }
}
