#ifndef LOWTW_H
#define LOWTW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum LowtwStatus {
  LOWTW_STATUS_OK = 0,
  LOWTW_STATUS_INVALID_ARGUMENT = 1,
  LOWTW_STATUS_VALIDATION_FAILED = 2,
  LOWTW_STATUS_RESOURCE_EXCEEDED = 3,
  LOWTW_STATUS_IO = 4,
  LOWTW_STATUS_PARSE = 5,
  LOWTW_STATUS_NULL_POINTER = 6,
  LOWTW_STATUS_PANIC = 7,
} LowtwStatus;

/*
 Opaque low-treewidth embedding of a planar graph.
 */
typedef struct LowtwEmbedding LowtwEmbedding;

/*
 Opaque weighted graph.
 */
typedef struct LowtwGraph LowtwGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. The pointer is
 valid until the next call into the library on this thread.
 */
const char *lowtw_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *lowtw_version(void);

/*
 Builds a graph on `n` vertices from `m` edges `(us[i], vs[i], ws[i])`.

 # Safety
 `us`, `vs` and `ws` must each point to `m` readable elements; `out_graph`
 must be writable.
 */
enum LowtwStatus lowtw_graph_new(size_t n,
                                 const size_t *us,
                                 const size_t *vs,
                                 const double *ws,
                                 size_t m,
                                 struct LowtwGraph **out_graph);

/*
 Builds a `rows x cols` grid with its planar rotation system. Weights are
 1, or uniform in `[1, 10)` drawn from `seed` when `random_weights` is set.

 # Safety
 `out_graph` must be writable.
 */
enum LowtwStatus lowtw_graph_grid(size_t rows,
                                  size_t cols,
                                  bool random_weights,
                                  uint64_t seed,
                                  struct LowtwGraph **out_graph);

/*
 Reads a graph in `.gr` format.

 # Safety
 `path` must be a NUL-terminated string; `out_graph` must be writable.
 */
enum LowtwStatus lowtw_graph_read(const char *path, struct LowtwGraph **out_graph);

/*
 Releases a graph. Null is ignored.

 # Safety
 `graph` must come from this library and not be used afterwards.
 */
void lowtw_graph_free(struct LowtwGraph *graph);

/*
 Number of vertices, or 0 for null.

 # Safety
 `graph` must be null or a live handle.
 */
size_t lowtw_graph_vertex_count(const struct LowtwGraph *graph);

/*
 Number of edges, or 0 for null.

 # Safety
 `graph` must be null or a live handle.
 */
size_t lowtw_graph_edge_count(const struct LowtwGraph *graph);

/*
 Height of the rooted shortest-path decomposition with at most `eta`
 boundary paths per piece.

 # Safety
 `graph` must be a live handle; `out_depth` must be writable.
 */
enum LowtwStatus lowtw_rspd_depth(const struct LowtwGraph *graph,
                                  size_t root,
                                  size_t eta,
                                  size_t *out_depth);

/*
 Embeds a planar graph (with a rotation system) into a host of low
 treewidth with additive distortion proportional to `eps` times the
 diameter.

 # Safety
 `graph` must be a live handle; `out_embedding` must be writable.
 */
enum LowtwStatus lowtw_embed(const struct LowtwGraph *graph,
                             size_t root,
                             double eps,
                             struct LowtwEmbedding **out_embedding);

/*
 Releases an embedding. Null is ignored.

 # Safety
 `embedding` must come from this library and not be used afterwards.
 */
void lowtw_embedding_free(struct LowtwEmbedding *embedding);

/*
 Host vertex count and the width of the host decomposition.

 # Safety
 `embedding` must be a live handle; the out pointers must be writable.
 */
enum LowtwStatus lowtw_embedding_info(const struct LowtwEmbedding *embedding,
                                      size_t *out_host_vertices,
                                      size_t *out_width);

/*
 Host distance between the canonical copies of `u` and `v`.

 # Safety
 `embedding` must be a live handle; `out_distance` must be writable.
 */
enum LowtwStatus lowtw_embedding_distance(const struct LowtwEmbedding *embedding,
                                          size_t u,
                                          size_t v,
                                          double *out_distance);

/*
 Bicriteria `rho`-independent set for the measure `mu` (one value per
 vertex). Writes up to `capacity` members to `out_members`, the full
 member count to `out_len` and the measure of the set to `out_value`.
 A capacity below the member count fails with `InvalidArgument` after
 setting `out_len`.

 # Safety
 `graph` must be a live handle, `mu` must point to one value per vertex,
 `out_members` to `capacity` writable slots; the other out pointers must
 be writable.
 */
enum LowtwStatus lowtw_baker_is(const struct LowtwGraph *graph,
                                size_t root,
                                double rho,
                                double eps,
                                const double *mu,
                                size_t *out_members,
                                size_t capacity,
                                size_t *out_len,
                                double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOWTW_H */
