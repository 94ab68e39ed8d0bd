#ifndef NMFPOOL_H
#define NMFPOOL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum NmfpoolStatus {
  NMFPOOL_STATUS_OK = 0,
  NMFPOOL_STATUS_NULL_POINTER = 1,
  NMFPOOL_STATUS_INVALID_ARGUMENT = 2,
  NMFPOOL_STATUS_SHAPE_MISMATCH = 3,
  NMFPOOL_STATUS_NOT_FOUND = 4,
  NMFPOOL_STATUS_PARSE = 5,
  NMFPOOL_STATUS_NUMERICAL = 6,
  NMFPOOL_STATUS_IO = 7,
  NMFPOOL_STATUS_BUFFER_TOO_SMALL = 8,
  NMFPOOL_STATUS_PANIC = 9,
} NmfpoolStatus;

// Opaque parsed TU dataset.
typedef struct NmfpoolDataset NmfpoolDataset;

// Opaque dense matrix.
typedef struct NmfpoolMatrix NmfpoolMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *nmfpool_version(void);

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next call into the library on this thread.
const char *nmfpool_last_error_message(void);

// Copies `rows * cols` row-major values into a new matrix.
//
// # Safety
// `data` must point to `rows * cols` readable doubles; `out` must be writable.
enum NmfpoolStatus nmfpool_matrix_new(size_t rows,
                                      size_t cols,
                                      const double *data,
                                      struct NmfpoolMatrix **out);

// Releases a matrix. NULL is ignored.
//
// # Safety
// `m` must come from this library and not be freed twice.
void nmfpool_matrix_free(struct NmfpoolMatrix *m);

// Number of rows, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live matrix handle.
size_t nmfpool_matrix_rows(const struct NmfpoolMatrix *m);

// Number of columns, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live matrix handle.
size_t nmfpool_matrix_cols(const struct NmfpoolMatrix *m);

// Copies the row-major values into `out`, which holds `len` doubles.
//
// # Safety
// `m` must be a live handle and `out` must hold `len` writable doubles.
enum NmfpoolStatus nmfpool_matrix_copy_data(const struct NmfpoolMatrix *m, double *out, size_t len);

// `D̂^{-1/2} (A + I) D̂^{-1/2}` of a square adjacency matrix.
//
// # Safety
// `a` must be a live handle; `out` must be writable.
enum NmfpoolStatus nmfpool_normalize_adjacency(const struct NmfpoolMatrix *a,
                                               struct NmfpoolMatrix **out);

// Non-negative factorization `A ≈ W H` with inner dimension `k` (clamped
// to `min(rows, cols) − 1`). Writes new handles to `out_w`, `out_h` and
// the final residual norm to `out_residual` (which may be NULL).
//
// # Safety
// `a` must be a live handle; `out_w` and `out_h` must be writable.
enum NmfpoolStatus nmfpool_factorize(const struct NmfpoolMatrix *a,
                                     size_t k,
                                     uint64_t seed,
                                     size_t max_iters,
                                     double rel_tol,
                                     struct NmfpoolMatrix **out_w,
                                     struct NmfpoolMatrix **out_h,
                                     double *out_residual);

// One pooling step on a square non-negative matrix: the assignment
// `S = Hᵀ` (`n × k'`) and the coarsened matrix `Sᵀ A S` (`k' × k'`).
//
// # Safety
// `a` must be a live handle; `out_s` and `out_a` must be writable.
enum NmfpoolStatus nmfpool_coarsen(const struct NmfpoolMatrix *a,
                                   size_t k,
                                   uint64_t seed,
                                   struct NmfpoolMatrix **out_s,
                                   struct NmfpoolMatrix **out_a);

// Pool sizes `k₁ = ⌊avg · p⌋`, `k₂ = ⌊k₁ / 2⌋`; writes `depth` entries.
//
// # Safety
// `out_ks` must hold at least `depth` writable values.
enum NmfpoolStatus nmfpool_pool_sizes(double avg_nodes,
                                      double fraction,
                                      size_t depth,
                                      size_t *out_ks);

// Parses the TU dataset `name` found in `root/name/` or `root/`.
//
// # Safety
// `root` and `name` must be NUL-terminated strings; `out` must be writable.
enum NmfpoolStatus nmfpool_dataset_open(const char *root,
                                        const char *name,
                                        struct NmfpoolDataset **out);

// Releases a dataset. NULL is ignored.
//
// # Safety
// `d` must come from this library and not be freed twice.
void nmfpool_dataset_free(struct NmfpoolDataset *d);

// Graph count, class count and mean node and edge counts. Any output
// pointer may be NULL.
//
// # Safety
// `d` must be a live handle.
enum NmfpoolStatus nmfpool_dataset_stats(const struct NmfpoolDataset *d,
                                         size_t *out_graphs,
                                         size_t *out_classes,
                                         double *out_avg_nodes,
                                         double *out_avg_edges);

// Dense 0/1 adjacency and the 0-based class of graph `index`.
//
// # Safety
// `d` must be a live handle; `out` must be writable; `out_class` may be NULL.
enum NmfpoolStatus nmfpool_dataset_graph(const struct NmfpoolDataset *d,
                                         size_t index,
                                         struct NmfpoolMatrix **out,
                                         size_t *out_class);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NMFPOOL_H */
