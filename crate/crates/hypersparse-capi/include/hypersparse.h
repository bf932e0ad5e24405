#ifndef HYPERSPARSE_H
#define HYPERSPARSE_H

/* Generated by cbindgen from hypersparse-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum HspStatus {
  HSP_STATUS_OK = 0,
  HSP_STATUS_NULL_ARGUMENT = 1,
  HSP_STATUS_INVALID_ARGUMENT = 2,
  HSP_STATUS_INDEX_OUT_OF_BOUNDS = 3,
  HSP_STATUS_DIMENSION_MISMATCH = 4,
  HSP_STATUS_DUPLICATE_INDEX = 5,
  HSP_STATUS_IO_ERROR = 6,
  HSP_STATUS_PARSE_ERROR = 7,
  HSP_STATUS_PANIC = 8,
} HspStatus;

// Opaque sparse matrix handle (`f64` elements, compressed sparse column).
typedef struct HspMatrix HspMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent error on this thread, or a pointer to
// an empty string if none. Valid until the next failing call on the thread.
const char *hsp_last_error_message(void);

// Builds an `rows x cols` matrix from coordinate triples; duplicates are
// summed and exact zeros dropped.
//
// # Safety
// `row_idx`, `col_idx`, `values` must point to `len` readable elements each;
// `out` must be a valid destination pointer. On success `*out` owns the
// matrix and must be released with [`hsp_matrix_free`].
enum HspStatus hsp_matrix_from_triples(size_t rows,
                                       size_t cols,
                                       const size_t *row_idx,
                                       const size_t *col_idx,
                                       const double *values,
                                       size_t len,
                                       struct HspMatrix **out);

// Releases a matrix created by this library. Null is ignored.
//
// # Safety
// `m` must be a pointer previously returned through an `out` parameter of
// this library and not yet freed.
void hsp_matrix_free(struct HspMatrix *m);

// # Safety
// `m` must be a live matrix handle.
size_t hsp_matrix_rows(const struct HspMatrix *m);

// # Safety
// `m` must be a live matrix handle.
size_t hsp_matrix_cols(const struct HspMatrix *m);

// # Safety
// `m` must be a live matrix handle.
size_t hsp_matrix_nnz(const struct HspMatrix *m);

// Copies the entries out in column-major order, 0-based.
//
// # Safety
// The three buffers must hold at least `hsp_matrix_nnz(m)` elements each.
enum HspStatus hsp_matrix_entries(const struct HspMatrix *m,
                                  size_t *row_idx,
                                  size_t *col_idx,
                                  double *values);

// Reads a Matrix Market coordinate file (real, general).
//
// # Safety
// `path` must be a NUL-terminated string, `out` a valid destination.
enum HspStatus hsp_matrix_read_mtx(const char *path, struct HspMatrix **out);

// Writes a Matrix Market coordinate file with round-trip precision.
//
// # Safety
// `m` must be a live handle; `path` a NUL-terminated string.
enum HspStatus hsp_matrix_write_mtx(const struct HspMatrix *m, const char *path);

// `C = A * B` with the column-wise kernel.
//
// # Safety
// `a`, `b` must be live handles; `out` a valid destination.
enum HspStatus hsp_multiply(const struct HspMatrix *a,
                            const struct HspMatrix *b,
                            struct HspMatrix **out);

// `C = A * B` with the outer-product kernel over doubly compressed storage;
// preferable when operands are hypersparse.
//
// # Safety
// As [`hsp_multiply`].
enum HspStatus hsp_multiply_hypersparse(const struct HspMatrix *a,
                                        const struct HspMatrix *b,
                                        struct HspMatrix **out);

// `C = A * B` on a simulated `pr x pc` process grid (Sparse SUMMA).
// `blocking == 0` picks the largest legal blocking parameter; `concurrent`
// selects free-running rank threads instead of round-robin supersteps.
//
// # Safety
// As [`hsp_multiply`].
enum HspStatus hsp_summa(const struct HspMatrix *a,
                         const struct HspMatrix *b,
                         size_t pr,
                         size_t pc,
                         size_t blocking,
                         bool concurrent,
                         struct HspMatrix **out);

// `C = A + B` entrywise.
//
// # Safety
// As [`hsp_multiply`].
enum HspStatus hsp_add(const struct HspMatrix *a,
                       const struct HspMatrix *b,
                       struct HspMatrix **out);

// `C = A^T`.
//
// # Safety
// `a` must be a live handle; `out` a valid destination.
enum HspStatus hsp_transpose(const struct HspMatrix *a, struct HspMatrix **out);

// Semiring multiplications `A * B` would perform, without forming it.
//
// # Safety
// `a`, `b` must be live handles; `flops` a valid destination.
enum HspStatus hsp_count_flops(const struct HspMatrix *a,
                               const struct HspMatrix *b,
                               uint64_t *flops);

// Submatrix extraction `B = A(I, J)`, order-preserving; duplicate indices
// replicate rows/columns.
//
// # Safety
// Index buffers must hold the stated number of readable elements; `out` must
// be a valid destination.
enum HspStatus hsp_spref(const struct HspMatrix *a,
                         const size_t *i_idx,
                         size_t i_len,
                         const size_t *j_idx,
                         size_t j_len,
                         struct HspMatrix **out);

// Submatrix assignment `C = A with A(I, J) = B`; `I`, `J` must be
// duplicate-free and match `B`'s dimensions.
//
// # Safety
// As [`hsp_spref`], plus `b` must be a live handle.
enum HspStatus hsp_spasgn(const struct HspMatrix *a,
                          const size_t *i_idx,
                          size_t i_len,
                          const size_t *j_idx,
                          size_t j_len,
                          const struct HspMatrix *b,
                          struct HspMatrix **out);

// `C = A + embed(B at (I, J))`: accumulates instead of replacing.
//
// # Safety
// As [`hsp_spasgn`].
enum HspStatus hsp_extend_add(const struct HspMatrix *a,
                              const size_t *i_idx,
                              size_t i_len,
                              const size_t *j_idx,
                              size_t j_len,
                              const struct HspMatrix *b,
                              struct HspMatrix **out);

// Skewed-degree random matrix (`2^scale` square) by recursive quadrant
// descent with the classic parameters; deterministic per seed.
//
// # Safety
// `out` must be a valid destination.
enum HspStatus hsp_gen_rmat(uint32_t scale,
                            size_t nnz_per_col,
                            uint64_t seed,
                            struct HspMatrix **out);

// Uniform random matrix with exactly `nnz_per_col` entries per column.
//
// # Safety
// `out` must be a valid destination.
enum HspStatus hsp_gen_erdos_renyi(size_t rows,
                                   size_t cols,
                                   size_t nnz_per_col,
                                   uint64_t seed,
                                   struct HspMatrix **out);

// Restriction operator of the given order: `(n/order) x n`, one nonzero per
// column.
//
// # Safety
// `out` must be a valid destination.
enum HspStatus hsp_gen_restriction(size_t n, size_t order, uint64_t seed, struct HspMatrix **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERSPARSE_H */
