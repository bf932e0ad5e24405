//! C ABI over the hypersparse toolkit, specialized to `f64` matrices under
//! ordinary arithmetic. Matrices are opaque handles created and freed here;
//! every fallible call returns an [`HspStatus`] and leaves a human-readable
//! message retrievable with [`hsp_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use hypersparse::generators::{erdos_renyi, restriction_operator, rmat, RmatParams};
use hypersparse::grid::{distribute, gather, ExecMode, GridConfig, RunOpts};
use hypersparse::indexing::{extend_add, spasgn, spref, IndexVector};
use hypersparse::io::{read_matrix_market, write_matrix_market};
use hypersparse::kernels::{columnwise_spgemm, count_flops, hypersparse_gemm, sparse_add};
use hypersparse::summa::{sparse_summa_with, SummaPlan};
use hypersparse::{CscMatrix, DcscMatrix, Error, PlusTimes, TripleList};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HspStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    IndexOutOfBounds = 3,
    DimensionMismatch = 4,
    DuplicateIndex = 5,
    IoError = 6,
    ParseError = 7,
    Panic = 8,
}

/// Opaque sparse matrix handle (`f64` elements, compressed sparse column).
pub struct HspMatrix {
    inner: CscMatrix<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> HspStatus {
    match err {
        Error::IndexOutOfBounds { .. } | Error::ColumnRangeOutOfBounds { .. } => HspStatus::IndexOutOfBounds,
        Error::DimensionMismatch { .. } => HspStatus::DimensionMismatch,
        Error::DuplicateIndex { .. } => HspStatus::DuplicateIndex,
        Error::Io(_) => HspStatus::IoError,
        Error::Parse { .. } => HspStatus::ParseError,
        _ => HspStatus::InvalidArgument,
    }
}

fn run<F>(body: F) -> HspStatus
where
    F: FnOnce() -> Result<(), (HspStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HspStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside hypersparse".into());
            HspStatus::Panic
        }
    }
}

fn fail(err: Error) -> (HspStatus, String) {
    (status_of(&err), err.to_string())
}

fn null_arg(what: &str) -> (HspStatus, String) {
    (HspStatus::NullArgument, format!("{what} must not be null"))
}

unsafe fn matrix_ref<'a>(m: *const HspMatrix, what: &str) -> Result<&'a CscMatrix<f64>, (HspStatus, String)> {
    m.as_ref().map(|h| &h.inner).ok_or_else(|| null_arg(what))
}

fn emit(out: *mut *mut HspMatrix, m: CscMatrix<f64>) -> Result<(), (HspStatus, String)> {
    if out.is_null() {
        return Err(null_arg("out"));
    }
    unsafe { *out = Box::into_raw(Box::new(HspMatrix { inner: m })) };
    Ok(())
}

unsafe fn path_arg(path: *const c_char) -> Result<PathBuf, (HspStatus, String)> {
    if path.is_null() {
        return Err(null_arg("path"));
    }
    let s = CStr::from_ptr(path)
        .to_str()
        .map_err(|_| (HspStatus::InvalidArgument, "path is not valid UTF-8".to_string()))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice_arg<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], (HspStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null_arg(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// Message describing the most recent error on this thread, or a pointer to
/// an empty string if none. Valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn hsp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(c"".as_ptr())
    })
}

/// Builds an `rows x cols` matrix from coordinate triples; duplicates are
/// summed and exact zeros dropped.
///
/// # Safety
/// `row_idx`, `col_idx`, `values` must point to `len` readable elements each;
/// `out` must be a valid destination pointer. On success `*out` owns the
/// matrix and must be released with [`hsp_matrix_free`].
#[no_mangle]
pub unsafe extern "C" fn hsp_matrix_from_triples(
    rows: usize,
    cols: usize,
    row_idx: *const usize,
    col_idx: *const usize,
    values: *const f64,
    len: usize,
    out: *mut *mut HspMatrix,
) -> HspStatus {
    run(|| {
        let r = slice_arg(row_idx, len, "row_idx")?;
        let c = slice_arg(col_idx, len, "col_idx")?;
        let v = slice_arg(values, len, "values")?;
        let entries: Vec<(usize, usize, f64)> = r
            .iter()
            .zip(c)
            .zip(v)
            .map(|((&ri, &ci), &vi)| (ri, ci, vi))
            .collect();
        let t = TripleList::from_entries(rows, cols, entries).map_err(fail)?;
        let m = CscMatrix::from_triples(&t, &PlusTimes).map_err(fail)?;
        emit(out, m)
    })
}

/// Releases a matrix created by this library. Null is ignored.
///
/// # Safety
/// `m` must be a pointer previously returned through an `out` parameter of
/// this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hsp_matrix_free(m: *mut HspMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn hsp_matrix_rows(m: *const HspMatrix) -> usize {
    m.as_ref().map_or(0, |h| h.inner.rows())
}

/// # Safety
/// `m` must be a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn hsp_matrix_cols(m: *const HspMatrix) -> usize {
    m.as_ref().map_or(0, |h| h.inner.cols())
}

/// # Safety
/// `m` must be a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn hsp_matrix_nnz(m: *const HspMatrix) -> usize {
    m.as_ref().map_or(0, |h| h.inner.nnz())
}

/// Copies the entries out in column-major order, 0-based.
///
/// # Safety
/// The three buffers must hold at least `hsp_matrix_nnz(m)` elements each.
#[no_mangle]
pub unsafe extern "C" fn hsp_matrix_entries(
    m: *const HspMatrix,
    row_idx: *mut usize,
    col_idx: *mut usize,
    values: *mut f64,
) -> HspStatus {
    run(|| {
        let a = matrix_ref(m, "m")?;
        if row_idx.is_null() || col_idx.is_null() || values.is_null() {
            return Err(null_arg("output buffers"));
        }
        for (k, (r, c, v)) in a.iter_entries().enumerate() {
            *row_idx.add(k) = r;
            *col_idx.add(k) = c;
            *values.add(k) = v;
        }
        Ok(())
    })
}

/// Reads a Matrix Market coordinate file (real, general).
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn hsp_matrix_read_mtx(path: *const c_char, out: *mut *mut HspMatrix) -> HspStatus {
    run(|| {
        let p = path_arg(path)?;
        let m = read_matrix_market(&p).map_err(fail)?;
        emit(out, m)
    })
}

/// Writes a Matrix Market coordinate file with round-trip precision.
///
/// # Safety
/// `m` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hsp_matrix_write_mtx(m: *const HspMatrix, path: *const c_char) -> HspStatus {
    run(|| {
        let a = matrix_ref(m, "m")?;
        let p = path_arg(path)?;
        write_matrix_market(a, &p).map_err(fail)
    })
}

/// `C = A * B` with the column-wise kernel.
///
/// # Safety
/// `a`, `b` must be live handles; `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn hsp_multiply(
    a: *const HspMatrix,
    b: *const HspMatrix,
    out: *mut *mut HspMatrix,
) -> HspStatus {
    run(|| {
        let (a, b) = (matrix_ref(a, "a")?, matrix_ref(b, "b")?);
        let (c, _) = columnwise_spgemm(a, b, &PlusTimes).map_err(fail)?;
        emit(out, c)
    })
}

/// `C = A * B` with the outer-product kernel over doubly compressed storage;
/// preferable when operands are hypersparse.
///
/// # Safety
/// As [`hsp_multiply`].
#[no_mangle]
pub unsafe extern "C" fn hsp_multiply_hypersparse(
    a: *const HspMatrix,
    b: *const HspMatrix,
    out: *mut *mut HspMatrix,
) -> HspStatus {
    run(|| {
        let (a, b) = (matrix_ref(a, "a")?, matrix_ref(b, "b")?);
        let (c, _) = hypersparse_gemm(&DcscMatrix::from_csc(a), &DcscMatrix::from_csc(b), &PlusTimes).map_err(fail)?;
        emit(out, c.to_csc())
    })
}

/// `C = A * B` on a simulated `pr x pc` process grid (Sparse SUMMA).
/// `blocking == 0` picks the largest legal blocking parameter; `concurrent`
/// selects free-running rank threads instead of round-robin supersteps.
///
/// # Safety
/// As [`hsp_multiply`].
#[no_mangle]
pub unsafe extern "C" fn hsp_summa(
    a: *const HspMatrix,
    b: *const HspMatrix,
    pr: usize,
    pc: usize,
    blocking: usize,
    concurrent: bool,
    out: *mut *mut HspMatrix,
) -> HspStatus {
    run(|| {
        let (a, b) = (matrix_ref(a, "a")?, matrix_ref(b, "b")?);
        if pr == 0 || pc == 0 {
            return Err((HspStatus::InvalidArgument, "grid dimensions must be positive".into()));
        }
        let grid = GridConfig::new(pr, pc);
        let blk = if blocking == 0 {
            SummaPlan::max_blocking(grid, a.cols()).ok_or_else(|| {
                fail(Error::GridDoesNotTile { pr, pc, k: a.cols() })
            })?
        } else {
            blocking
        };
        let opts = RunOpts {
            mode: if concurrent { ExecMode::Concurrent } else { ExecMode::Sequential },
            ..Default::default()
        };
        let da = distribute(a, grid);
        let db = distribute(b, grid);
        let (c, _) = sparse_summa_with(&da, &db, blk, &PlusTimes, opts).map_err(fail)?;
        emit(out, gather(&c, &PlusTimes))
    })
}

/// `C = A + B` entrywise.
///
/// # Safety
/// As [`hsp_multiply`].
#[no_mangle]
pub unsafe extern "C" fn hsp_add(a: *const HspMatrix, b: *const HspMatrix, out: *mut *mut HspMatrix) -> HspStatus {
    run(|| {
        let (a, b) = (matrix_ref(a, "a")?, matrix_ref(b, "b")?);
        let c = sparse_add(&DcscMatrix::from_csc(a), &DcscMatrix::from_csc(b), &PlusTimes).map_err(fail)?;
        emit(out, c.to_csc())
    })
}

/// `C = A^T`.
///
/// # Safety
/// `a` must be a live handle; `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn hsp_transpose(a: *const HspMatrix, out: *mut *mut HspMatrix) -> HspStatus {
    run(|| {
        let a = matrix_ref(a, "a")?;
        emit(out, DcscMatrix::from_csc(a).transpose().to_csc())
    })
}

/// Semiring multiplications `A * B` would perform, without forming it.
///
/// # Safety
/// `a`, `b` must be live handles; `flops` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn hsp_count_flops(a: *const HspMatrix, b: *const HspMatrix, flops: *mut u64) -> HspStatus {
    run(|| {
        let (a, b) = (matrix_ref(a, "a")?, matrix_ref(b, "b")?);
        if flops.is_null() {
            return Err(null_arg("flops"));
        }
        let f = count_flops(&DcscMatrix::from_csc(a), &DcscMatrix::from_csc(b)).map_err(fail)?;
        *flops = f;
        Ok(())
    })
}

/// Submatrix extraction `B = A(I, J)`, order-preserving; duplicate indices
/// replicate rows/columns.
///
/// # Safety
/// Index buffers must hold the stated number of readable elements; `out` must
/// be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn hsp_spref(
    a: *const HspMatrix,
    i_idx: *const usize,
    i_len: usize,
    j_idx: *const usize,
    j_len: usize,
    out: *mut *mut HspMatrix,
) -> HspStatus {
    run(|| {
        let a = matrix_ref(a, "a")?;
        let i_vec = IndexVector::new(slice_arg(i_idx, i_len, "i_idx")?.to_vec());
        let j_vec = IndexVector::new(slice_arg(j_idx, j_len, "j_idx")?.to_vec());
        let b = spref(a, &i_vec, &j_vec, &PlusTimes).map_err(fail)?;
        emit(out, b)
    })
}

/// Submatrix assignment `C = A with A(I, J) = B`; `I`, `J` must be
/// duplicate-free and match `B`'s dimensions.
///
/// # Safety
/// As [`hsp_spref`], plus `b` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hsp_spasgn(
    a: *const HspMatrix,
    i_idx: *const usize,
    i_len: usize,
    j_idx: *const usize,
    j_len: usize,
    b: *const HspMatrix,
    out: *mut *mut HspMatrix,
) -> HspStatus {
    run(|| {
        let (a, b) = (matrix_ref(a, "a")?, matrix_ref(b, "b")?);
        let i_vec = IndexVector::new(slice_arg(i_idx, i_len, "i_idx")?.to_vec());
        let j_vec = IndexVector::new(slice_arg(j_idx, j_len, "j_idx")?.to_vec());
        let c = spasgn(a, &i_vec, &j_vec, b, &PlusTimes).map_err(fail)?;
        emit(out, c)
    })
}

/// `C = A + embed(B at (I, J))`: accumulates instead of replacing.
///
/// # Safety
/// As [`hsp_spasgn`].
#[no_mangle]
pub unsafe extern "C" fn hsp_extend_add(
    a: *const HspMatrix,
    i_idx: *const usize,
    i_len: usize,
    j_idx: *const usize,
    j_len: usize,
    b: *const HspMatrix,
    out: *mut *mut HspMatrix,
) -> HspStatus {
    run(|| {
        let (a, b) = (matrix_ref(a, "a")?, matrix_ref(b, "b")?);
        let i_vec = IndexVector::new(slice_arg(i_idx, i_len, "i_idx")?.to_vec());
        let j_vec = IndexVector::new(slice_arg(j_idx, j_len, "j_idx")?.to_vec());
        let c = extend_add(a, &i_vec, &j_vec, b, &PlusTimes).map_err(fail)?;
        emit(out, c)
    })
}

/// Skewed-degree random matrix (`2^scale` square) by recursive quadrant
/// descent with the classic parameters; deterministic per seed.
///
/// # Safety
/// `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn hsp_gen_rmat(
    scale: u32,
    nnz_per_col: usize,
    seed: u64,
    out: *mut *mut HspMatrix,
) -> HspStatus {
    run(|| {
        let params = RmatParams {
            nnz_per_col,
            ..RmatParams::new(scale, seed)
        };
        emit(out, rmat(&params).map_err(fail)?)
    })
}

/// Uniform random matrix with exactly `nnz_per_col` entries per column.
///
/// # Safety
/// `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn hsp_gen_erdos_renyi(
    rows: usize,
    cols: usize,
    nnz_per_col: usize,
    seed: u64,
    out: *mut *mut HspMatrix,
) -> HspStatus {
    run(|| emit(out, erdos_renyi(rows, cols, nnz_per_col, seed).map_err(fail)?))
}

/// Restriction operator of the given order: `(n/order) x n`, one nonzero per
/// column.
///
/// # Safety
/// `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn hsp_gen_restriction(
    n: usize,
    order: usize,
    seed: u64,
    out: *mut *mut HspMatrix,
) -> HspStatus {
    run(|| emit(out, restriction_operator(n, order, seed).map_err(fail)?))
}
