#ifndef AGC_H
#define AGC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AgcStatus {
  AGC_STATUS_OK = 0,
  AGC_STATUS_NULL_POINTER = 1,
  AGC_STATUS_INVALID_ARGUMENT = 2,
  AGC_STATUS_PARSE = 3,
  AGC_STATUS_VALIDATION = 4,
  AGC_STATUS_DOMAIN = 5,
  AGC_STATUS_IO = 6,
  AGC_STATUS_ABORTED = 7,
  AGC_STATUS_PANIC = 8,
  AGC_STATUS_INTERNAL = 9,
} AgcStatus;

// Outcome of [`agc_run`].
typedef struct AgcClustering AgcClustering;

// Dense row-major node feature matrix.
typedef struct AgcFeatures AgcFeatures;

// Undirected, weighted graph.
typedef struct AgcGraph AgcGraph;

// Tuning knobs for [`agc_run`]. Start from [`agc_run_options_default`].
typedef struct AgcRunOptions {
  size_t clusters;
  size_t max_iter;
  uint64_t seed;
  size_t kmeans_restarts;
} AgcRunOptions;

typedef struct AgcMetrics {
  double acc;
  double nmi;
  double macro_f1;
} AgcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *agc_last_error(void);

// Library version as a static NUL-terminated string.
const char *agc_version(void);

// Builds a graph on `n` nodes from `num_edges` undirected edges
// `(src[i], dst[i])`. `weights` may be null for unit weights.
//
// # Safety
// `src`, `dst` and non-null `weights` must point to `num_edges` readable
// elements; `out` must be writable.
enum AgcStatus agc_graph_from_edges(size_t n,
                                    const size_t *src,
                                    const size_t *dst,
                                    const double *weights,
                                    size_t num_edges,
                                    struct AgcGraph **out);

// Reads a whitespace-separated edge list (`u v [w]`, `#` comments).
// `n` is a minimum node count; pass 0 to infer it from the largest id.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum AgcStatus agc_graph_load(const char *path, size_t n, struct AgcGraph **out);

// Node count, or 0 for a null handle.
//
// # Safety
// `g` must be null or a live handle.
size_t agc_graph_num_nodes(const struct AgcGraph *g);

// Undirected edge count (self-loops once), or 0 for a null handle.
//
// # Safety
// `g` must be null or a live handle.
size_t agc_graph_num_edges(const struct AgcGraph *g);

// # Safety
// `g` must be null or a handle not yet freed.
void agc_graph_free(struct AgcGraph *g);

// Copies an `n x d` row-major matrix.
//
// # Safety
// `data` must point to `n * d` readable doubles; `out` must be writable.
enum AgcStatus agc_features_from_rows(const double *data,
                                      size_t n,
                                      size_t d,
                                      struct AgcFeatures **out);

// Reads a headerless comma-separated matrix.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum AgcStatus agc_features_load(const char *path, struct AgcFeatures **out);

// Writes the matrix shape to `n` and `d`.
//
// # Safety
// `x` must be a live handle; `n` and `d` must be writable.
enum AgcStatus agc_features_shape(const struct AgcFeatures *x, size_t *n, size_t *d);

// Copies the matrix, row-major, into `buf`, which must hold exactly `n * d`
// doubles.
//
// # Safety
// `x` must be a live handle; `buf` must point to `len` writable doubles.
enum AgcStatus agc_features_copy(const struct AgcFeatures *x, double *buf, size_t len);

// # Safety
// `x` must be null or a handle not yet freed.
void agc_features_free(struct AgcFeatures *x);

// Applies the low-pass filter `k` times and returns the smoothed features.
//
// # Safety
// `g` and `x` must be live handles; `out` must be writable.
enum AgcStatus agc_filter(const struct AgcGraph *g,
                          const struct AgcFeatures *x,
                          size_t k,
                          struct AgcFeatures **out);

struct AgcRunOptions agc_run_options_default(void);

// Clusters the nodes, choosing the filter order adaptively.
//
// # Safety
// `g`, `x` and `opts` must be valid pointers; `out` must be writable.
enum AgcStatus agc_run(const struct AgcGraph *g,
                       const struct AgcFeatures *x,
                       const struct AgcRunOptions *opts,
                       struct AgcClustering **out);

// Selected filter order, or 0 for a null handle.
//
// # Safety
// `r` must be null or a live handle.
size_t agc_clustering_k(const struct AgcClustering *r);

// Intra-cluster distance at the selected order, NaN for a null handle.
//
// # Safety
// `r` must be null or a live handle.
double agc_clustering_intra(const struct AgcClustering *r);

// Number of labelled nodes, or 0 for a null handle.
//
// # Safety
// `r` must be null or a live handle.
size_t agc_clustering_num_nodes(const struct AgcClustering *r);

// Number of clusters, or 0 for a null handle.
//
// # Safety
// `r` must be null or a live handle.
size_t agc_clustering_num_clusters(const struct AgcClustering *r);

// Copies the cluster label of each node into `buf` (length must equal the
// node count).
//
// # Safety
// `r` must be a live handle; `buf` must point to `len` writable elements.
enum AgcStatus agc_clustering_labels(const struct AgcClustering *r, size_t *buf, size_t len);

// # Safety
// `r` must be null or a handle not yet freed.
void agc_clustering_free(struct AgcClustering *r);

// Scores `pred` against `truth`, both dense labels of length `n`.
// NMI uses geometric normalization.
//
// # Safety
// `pred` and `truth` must point to `n` readable elements; `out` must be
// writable.
enum AgcStatus agc_evaluate(const size_t *pred,
                            const size_t *truth,
                            size_t n,
                            struct AgcMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AGC_H */
