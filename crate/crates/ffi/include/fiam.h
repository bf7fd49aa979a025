#ifndef FIAM_H
#define FIAM_H

#include <stddef.h>
#include <stdint.h>

typedef enum FiamStatus {
  FIAM_STATUS_OK = 0,
  FIAM_STATUS_NULL_POINTER = 1,
  FIAM_STATUS_UTF8 = 2,
  FIAM_STATUS_IO = 3,
  FIAM_STATUS_PARSE = 4,
  FIAM_STATUS_VALIDATION = 5,
  FIAM_STATUS_INVALID_PAIR = 6,
  FIAM_STATUS_EDGE_EXISTS = 7,
  FIAM_STATUS_EMPTY_GROUP = 8,
  FIAM_STATUS_SINGULAR_MATRIX = 9,
  FIAM_STATUS_GRAPH_TOO_LARGE = 10,
  FIAM_STATUS_BUDGET_TOO_LARGE = 11,
  FIAM_STATUS_COMBINATORIAL_BLOWUP = 12,
  FIAM_STATUS_NO_CONVERGENCE = 13,
  FIAM_STATUS_DEGENERATE_INPUT = 14,
  FIAM_STATUS_NO_NON_EDGE = 15,
  FIAM_STATUS_INSUFFICIENT_CANDIDATES = 16,
  FIAM_STATUS_INVALID_PARAMETER = 17,
  FIAM_STATUS_OUT_OF_RANGE = 18,
  FIAM_STATUS_PANIC = 19,
} FiamStatus;

/**
 * Group label of a node.
 */
typedef enum FiamGroup {
  FIAM_GROUP_S = 0,
  FIAM_GROUP_T = 1,
  FIAM_GROUP_O = 2,
} FiamGroup;

/**
 * Opaque undirected graph.
 */
typedef struct FiamGraph FiamGraph;

/**
 * Opaque S/T/O split of the nodes.
 */
typedef struct FiamGroups FiamGroups;

/**
 * Opaque result of an optimization run.
 */
typedef struct FiamSelection FiamSelection;

/**
 * Metrics of one graph state. `i_o` is NaN when `O` is empty;
 * `kirchhoff` is NaN for per-iteration records.
 */
typedef struct FiamMetrics {
  double r;
  double i_s;
  double i_t;
  double i_o;
  double u;
  double kirchhoff;
  double f;
  /**
   * Non-zero when the values come from sketched estimates.
   */
  uint8_t approximate;
} FiamMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated name of a status code.
 */
const char *fiam_status_name(enum FiamStatus status);

/**
 * Message of the last failed call on this thread, or null.
 * Valid until the next `fiam_*` call on the same thread.
 */
const char *fiam_last_error_message(void);

/**
 * Builds a graph on nodes `0..n` from `m` edges `(us[i], vs[i])`.
 *
 * # Safety
 * `us` and `vs` must point to `m` readable elements; `out` must be writable.
 */
enum FiamStatus fiam_graph_from_edges(size_t n,
                                      const size_t *us,
                                      const size_t *vs,
                                      size_t m,
                                      struct FiamGraph **out);

/**
 * Loads a whitespace separated edge list. Node ids are renumbered densely
 * in ascending order of the ids in the file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FiamStatus fiam_graph_load(const char *path, struct FiamGraph **out);

/**
 * # Safety
 * `g` must be null or a live handle from this library.
 */
size_t fiam_graph_node_count(const struct FiamGraph *g);

/**
 * # Safety
 * `g` must be null or a live handle from this library.
 */
size_t fiam_graph_edge_count(const struct FiamGraph *g);

/**
 * # Safety
 * `g` must be null or a handle not yet freed.
 */
void fiam_graph_free(struct FiamGraph *g);

/**
 * Builds a group split from one label per node.
 *
 * # Safety
 * `labels` must point to `n` readable elements; `out` must be writable.
 */
enum FiamStatus fiam_groups_new(const enum FiamGroup *labels, size_t n, struct FiamGroups **out);

/**
 * # Safety
 * `ga` must be null or a handle not yet freed.
 */
void fiam_groups_free(struct FiamGroups *ga);

/**
 * Exact metrics of `g` under split `ga` and fairness weight `lambda`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum FiamStatus fiam_evaluate(const struct FiamGraph *g,
                              const struct FiamGroups *ga,
                              double lambda,
                              struct FiamMetrics *out);

/**
 * Selects `k` new edges with `algo` (`exact`, `gradient`, `fast` or
 * `baseline:<kind>`).
 *
 * # Safety
 * Handles must be live; `algo` must be a NUL-terminated string; `out` must be writable.
 */
enum FiamStatus fiam_optimize(const struct FiamGraph *g,
                              const struct FiamGroups *ga,
                              const char *algo,
                              double lambda,
                              size_t k,
                              double epsilon,
                              uint64_t seed,
                              struct FiamSelection **out);

/**
 * Number of selected edges.
 *
 * # Safety
 * `sel` must be null or a live handle.
 */
size_t fiam_selection_len(const struct FiamSelection *sel);

/**
 * Endpoints of the `i`-th selected edge, `i < len`.
 *
 * # Safety
 * `sel` must be live; `u` and `v` must be writable.
 */
enum FiamStatus fiam_selection_edge(const struct FiamSelection *sel,
                                    size_t i,
                                    size_t *u,
                                    size_t *v);

/**
 * Metrics after `i` additions: `0` is the input graph, `len` the final graph.
 *
 * # Safety
 * `sel` must be live; `out` must be writable.
 */
enum FiamStatus fiam_selection_metrics(const struct FiamSelection *sel,
                                       size_t i,
                                       struct FiamMetrics *out);

/**
 * # Safety
 * `sel` must be null or a handle not yet freed.
 */
void fiam_selection_free(struct FiamSelection *sel);

/**
 * Homophilous preferential-attachment graph with its group split.
 * `m_attach = 0` keeps the default.
 *
 * # Safety
 * `out_graph` and `out_groups` must be writable.
 */
enum FiamStatus fiam_generate_bah(size_t n,
                                  double f_a,
                                  double h,
                                  size_t m_attach,
                                  uint64_t seed,
                                  struct FiamGraph **out_graph,
                                  struct FiamGroups **out_groups);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIAM_H */
