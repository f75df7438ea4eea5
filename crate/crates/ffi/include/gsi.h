#ifndef GSI_H
#define GSI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// How an estimate is corrected for `mu²`.
typedef enum GsiCorrection {
  // None for contrasts, mean correction otherwise.
  GSI_CORRECTION_AUTO = 0,
  GSI_CORRECTION_NONE = 1,
  GSI_CORRECTION_MEAN = 2,
  // Averaged over `replicates` streams; needs `n >= 2`.
  GSI_CORRECTION_BIAS = 3,
} GsiCorrection;

// Result code of every call.
typedef enum GsiStatus {
  GSI_STATUS_OK = 0,
  GSI_STATUS_NULL_POINTER = 1,
  GSI_STATUS_INVALID_ARGUMENT = 2,
  GSI_STATUS_PARSE = 3,
  GSI_STATUS_UNSUPPORTED = 4,
  GSI_STATUS_IO = 5,
  GSI_STATUS_PANIC = 6,
} GsiStatus;

// Opaque test function.
typedef struct GsiModel GsiModel;

// Opaque coefficient spec.
typedef struct GsiSpec GsiSpec;

// Arguments for [`gsi_spec_from_catalog`]. Unused sets are ignored.
typedef struct GsiCatalogParams {
  size_t d;
  uint32_t u;
  uint32_t w;
  uint32_t w1;
  // Use `w1` as the split; otherwise the lower half of `w`.
  bool has_w1;
  bool extended;
  // Which spec of a batch entry to return; 0 for single entries.
  size_t item;
} GsiCatalogParams;

typedef struct GsiSampleConfig {
  size_t n;
  uint64_t seed;
  size_t replicates;
  size_t workers;
} GsiSampleConfig;

typedef struct GsiEstimate {
  double estimate;
  double std_error;
  size_t n;
  size_t replicates;
  size_t evals_per_pair;
  uint64_t total_evals;
} GsiEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call on this thread.
const char *gsi_last_error(void);

// Parses a model from shorthand (`min:d=5`, `product:tau=1,0.5`), inline JSON, or a file path.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` a valid pointer.
enum GsiStatus gsi_model_parse(const char *spec, struct GsiModel **out);

// `min(x_1, ..., x_d)`.
//
// # Safety
// `out` must be a valid pointer.
enum GsiStatus gsi_model_min(size_t d, struct GsiModel **out);

// `prod_j (mu_j + tau_j sqrt(12)(x_j − 1/2))`. `mu` may be null for all ones.
//
// # Safety
// `tau` (and `mu` if non-null) must point to `d` doubles; `out` must be valid.
enum GsiStatus gsi_model_product(const double *mu,
                                 const double *tau,
                                 size_t d,
                                 struct GsiModel **out);

// # Safety
// `model` must come from a `gsi_model_*` constructor and not be used afterwards. Null is ignored.
void gsi_model_free(struct GsiModel *model);

// Input dimension, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t gsi_model_dim(const struct GsiModel *model);

// Evaluates at `x`, which must lie in `[0,1]^d`.
//
// # Safety
// `x` must point to `len` doubles; `model` and `out` must be valid.
enum GsiStatus gsi_model_eval(const struct GsiModel *model,
                              const double *x,
                              size_t len,
                              double *out);

// Exact index by name: `mean`, `total_variance`, `sigma`, `lower`, `upper`,
// `superset` or `mean_dimension`. Grid models go through their lattice ANOVA.
//
// # Safety
// `kind` must be a NUL-terminated string; `model` and `out` must be valid.
enum GsiStatus gsi_model_exact_index(const struct GsiModel *model,
                                     const char *kind,
                                     uint32_t u,
                                     double *out);

// Parses a spec from its JSON form.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum GsiStatus gsi_spec_from_json(const char *json, struct GsiSpec **out);

// Builds a catalog estimator by name.
//
// # Safety
// `name` must be a NUL-terminated string; `params` and `out` must be valid.
enum GsiStatus gsi_spec_from_catalog(const char *name,
                                     const struct GsiCatalogParams *params,
                                     struct GsiSpec **out);

// Number of specs a catalog entry builds (1 except for batch entries).
//
// # Safety
// `name` must be a NUL-terminated string; `params` and `out` must be valid.
enum GsiStatus gsi_catalog_count(const char *name,
                                 const struct GsiCatalogParams *params,
                                 size_t *out);

// # Safety
// `spec` must come from a `gsi_spec_*` constructor and not be used afterwards. Null is ignored.
void gsi_spec_free(struct GsiSpec *spec);

// Distinct evaluations per pair, or 0 for a null handle.
//
// # Safety
// `spec` must be null or a live handle.
size_t gsi_spec_cost(const struct GsiSpec *spec);

// `sum Omega²`, or NaN for a null handle.
//
// # Safety
// `spec` must be null or a live handle.
double gsi_spec_proxy_variance(const struct GsiSpec *spec);

// False for a null handle.
//
// # Safety
// `spec` must be null or a live handle.
bool gsi_spec_is_contrast(const struct GsiSpec *spec);

// Writes a newly allocated JSON string to `out`; release it with [`gsi_string_free`].
//
// # Safety
// `spec` and `out` must be valid.
enum GsiStatus gsi_spec_to_json(const struct GsiSpec *spec, char **out);

// # Safety
// `s` must come from this library and not be used afterwards. Null is ignored.
void gsi_string_free(char *s);

// Exact `tr(Omega^T Theta)` for a model with a known oracle.
//
// # Safety
// All pointers must be valid.
enum GsiStatus gsi_spec_expected_value(const struct GsiSpec *spec,
                                       const struct GsiModel *model,
                                       double *out);

// Monte Carlo estimate of `spec` on `model`.
//
// # Safety
// All pointers must be valid.
enum GsiStatus gsi_estimate(const struct GsiSpec *spec,
                            const struct GsiModel *model,
                            const struct GsiSampleConfig *config,
                            enum GsiCorrection correction,
                            struct GsiEstimate *out);

// Library version as a static NUL-terminated string.
const char *gsi_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSI_H */
