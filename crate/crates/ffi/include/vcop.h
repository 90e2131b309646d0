#ifndef VCOP_H
#define VCOP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Maximum likelihood.
 */
#define VCOP_CRITERION_ML 0

/**
 * Restricted maximum likelihood.
 */
#define VCOP_CRITERION_REML 1

typedef enum VcopStatus {
  VCOP_STATUS_OK = 0,
  VCOP_STATUS_NULL_POINTER = 1,
  VCOP_STATUS_INVALID_ARGUMENT = 2,
  VCOP_STATUS_INVALID_UTF8 = 3,
  VCOP_STATUS_PARSE_ERROR = 4,
  VCOP_STATUS_FIT_ERROR = 5,
  /**
   * The quantity is undefined for this input (e.g. fewer than 3 nodes).
   */
  VCOP_STATUS_UNDEFINED = 6,
  VCOP_STATUS_BUFFER_TOO_SMALL = 7,
  VCOP_STATUS_PANIC = 8,
} VcopStatus;

/**
 * Parsed post archive with its ingest diagnostics.
 */
typedef struct VcopArchive VcopArchive;

/**
 * Fitted random-intercept model.
 */
typedef struct VcopFit VcopFit;

/**
 * Directed reply graph between authors.
 */
typedef struct VcopGraph VcopGraph;

/**
 * Community-month panel read from CSV.
 */
typedef struct VcopPanel VcopPanel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *vcop_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void vcop_string_free(char *s);

enum VcopStatus vcop_graph_new(struct VcopGraph **graph);

/**
 * Records a reply by `from` to a post of `to`. Self-replies are kept as
 * arcs but never affect betweenness.
 */
enum VcopStatus vcop_graph_add_reply(struct VcopGraph *graph, const char *from, const char *to);

enum VcopStatus vcop_graph_node_count(const struct VcopGraph *graph, size_t *count);

/**
 * Raw betweenness per node in insertion order. `len` must be at least the
 * node count; otherwise `BufferTooSmall` is returned and nothing is written.
 */
enum VcopStatus vcop_graph_betweenness(const struct VcopGraph *graph, double *scores, size_t len);

/**
 * Group betweenness centralization; `Undefined` below three nodes.
 */
enum VcopStatus vcop_graph_group_betweenness(const struct VcopGraph *graph, double *value);

void vcop_graph_free(struct VcopGraph *graph);

/**
 * Parses `len` bytes in `format` ("jsonl" or "csv").
 */
enum VcopStatus vcop_archive_parse(const uint8_t *data,
                                   size_t len,
                                   const char *format,
                                   struct VcopArchive **archive);

enum VcopStatus vcop_archive_post_count(const struct VcopArchive *archive, size_t *count);

enum VcopStatus vcop_archive_diagnostic_count(const struct VcopArchive *archive, size_t *count);

void vcop_archive_free(struct VcopArchive *archive);

enum VcopStatus vcop_panel_read_csv(const uint8_t *data, size_t len, struct VcopPanel **panel);

enum VcopStatus vcop_panel_row_count(const struct VcopPanel *panel, size_t *count);

void vcop_panel_free(struct VcopPanel *panel);

/**
 * Fits `model` (a standard name such as "full", or "NAME=cov1+cov2") with
 * `criterion` [`VCOP_CRITERION_ML`] or [`VCOP_CRITERION_REML`].
 */
enum VcopStatus vcop_fit(const struct VcopPanel *panel,
                         const char *model,
                         int32_t criterion,
                         struct VcopFit **fit);

/**
 * Number of fixed effects, intercept included.
 */
enum VcopStatus vcop_fit_coefficient_count(const struct VcopFit *fit, size_t *count);

/**
 * Estimate, standard error and p-value of fixed effect `index`
 * (0 = intercept). Null output pointers are skipped.
 */
enum VcopStatus vcop_fit_coefficient(const struct VcopFit *fit,
                                     size_t index,
                                     double *estimate,
                                     double *std_error,
                                     double *p_value);

/**
 * Between-community and residual variance plus the ICC.
 */
enum VcopStatus vcop_fit_variances(const struct VcopFit *fit,
                                   double *level2,
                                   double *level1,
                                   double *icc);

/**
 * The fit as JSON; release with [`vcop_string_free`].
 */
enum VcopStatus vcop_fit_to_json(const struct VcopFit *fit, char **json);

void vcop_fit_free(struct VcopFit *fit);

enum VcopStatus vcop_count_oscillations(const double *values, size_t len, size_t *count);

/**
 * Pearson r and two-sided p-value; `Undefined` for fewer than 3 pairs or
 * a constant series.
 */
enum VcopStatus vcop_pearson(const double *x,
                             const double *y,
                             size_t len,
                             double *r,
                             double *p_value);

enum VcopStatus vcop_icc(double level2, double level1, double *icc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VCOP_H */
