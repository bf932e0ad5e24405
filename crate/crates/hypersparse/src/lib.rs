//! Semiring-generic sparse matrix toolkit.
//!
//! The crate provides:
//!
//! - three storage formats — raw [`TripleList`], [`CscMatrix`], and the
//!   hypersparse [`DcscMatrix`] whose footprint is independent of the matrix
//!   dimension — with conversions, transpose, and column slicing;
//! - sequential kernels over any [`Semiring`]: a column-wise SpGEMM with a
//!   sparse accumulator, an outer-product `HyperSparseGEMM` over DCSC,
//!   pointwise addition, and masked elementwise multiplication, all with
//!   exact operation counters;
//! - a deterministic simulated `pr x pc` process grid with row/column
//!   collectives, 2D block distribution, and per-rank communication
//!   accounting ([`grid`]);
//! - the Sparse SUMMA distributed multiplication over that grid together with
//!   an alpha-beta communication cost model ([`summa`]);
//! - generalized sparse indexing (`spref`), assignment (`spasgn`), and
//!   extend-add as triple sparse-matrix products, sequential and distributed
//!   ([`indexing`]);
//! - reproducible input generators (R-MAT, Erdos-Renyi, restriction
//!   operators, random symmetric permutations) and Matrix Market I/O;
//! - a benchmark CLI (`bench`) that re-creates the classic experiment shapes
//!   at desk scale and emits CSV reports of counters and cost-model
//!   comparisons.
//!
//! Indices are 0-based in memory and in all files this crate writes, except
//! Matrix Market files, which are 1-based on disk per that format.
//!
//! All matrices are immutable after construction and all kernels are pure
//! functions of their inputs, so values can be shared freely across the
//! simulated ranks.

pub mod csc;
pub mod dcsc;
mod error;
pub mod experiment;
pub mod generators;
pub mod grid;
pub mod indexing;
pub mod io;
pub mod kernels;
pub mod reference;
pub mod semiring;
pub mod summa;
pub mod triples;

pub use csc::CscMatrix;
pub use dcsc::{DcscMatrix, SliceCost};
pub use error::{Error, Result};
pub use semiring::{BoolOrAnd, MinPlus, PlusTimes, PlusTimesI64, Semiring};
pub use triples::TripleList;
