#ifndef GKZ_EULER_H
#define GKZ_EULER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GkzStatus {
  GKZ_STATUS_OK = 0,
  GKZ_STATUS_RESIDUAL_FAILURE = 1,
  GKZ_STATUS_BAD_INPUT = 2,
  GKZ_STATUS_DEGENERATE = 3,
  GKZ_STATUS_NUMERIC = 4,
  GKZ_STATUS_NULL_POINTER = 5,
  GKZ_STATUS_PANIC = 6,
} GkzStatus;

/**
 * Opaque configuration matrix.
 */
typedef struct GkzConfig GkzConfig;

/**
 * Opaque triangulation, tied to the configuration it was built from.
 */
typedef struct GkzTriangulation GkzTriangulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; valid until the next call.
 */
const char *gkz_last_error(void);

/**
 * Resolves a registry name or JSON document path into a configuration.
 */
enum GkzStatus gkz_config_new(const char *name, struct GkzConfig **out);

void gkz_config_free(struct GkzConfig *cfg);

/**
 * Number of columns `N`, or 0 for a null handle.
 */
size_t gkz_config_num_cols(const struct GkzConfig *cfg);

/**
 * Row count `n + k`, or 0 for a null handle.
 */
size_t gkz_config_dim(const struct GkzConfig *cfg);

/**
 * Regular triangulation induced by the `len` integers at `omega`.
 */
enum GkzStatus gkz_triangulate(const struct GkzConfig *cfg,
                               const int64_t *omega,
                               size_t len,
                               struct GkzTriangulation **out);

void gkz_triangulation_free(struct GkzTriangulation *t);

size_t gkz_triangulation_num_simplices(const struct GkzTriangulation *t);

/**
 * Writes the convergent and unimodular flags.
 */
enum GkzStatus gkz_triangulation_flags(const struct GkzTriangulation *t,
                                       bool *convergent,
                                       bool *unimodular);

/**
 * Copies the 1-based column labels of simplex `index` into `labels`
 * (capacity `cap`) and stores their count in `len`.
 */
enum GkzStatus gkz_triangulation_simplex(const struct GkzTriangulation *t,
                                         size_t index,
                                         size_t *labels,
                                         size_t cap,
                                         size_t *len);

/**
 * Runs one named relation with default parameters drawn from `seed`;
 * `order == 0` selects the case default. The residual is written on success
 * and on residual failure.
 */
enum GkzStatus gkz_verify(const char *case_, uint64_t seed, size_t order, double *residual);

/**
 * Runs a JSON case spec and returns the JSON report in `out`; free it with
 * [`gkz_string_free`]. The status reflects the verdict.
 */
enum GkzStatus gkz_verify_json(const char *spec, char **out);

void gkz_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GKZ_EULER_H */
