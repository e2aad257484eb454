#ifndef MOB_H
#define MOB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MobStatus {
  MOB_STATUS_OK = 0,
  MOB_STATUS_NULL_POINTER = 1,
  MOB_STATUS_INVALID_UTF8 = 2,
  MOB_STATUS_PARSE = 3,
  MOB_STATUS_UNBOUND = 4,
  MOB_STATUS_DOMAIN = 5,
  MOB_STATUS_POLE = 6,
  MOB_STATUS_NOT_CONVERGED = 7,
  MOB_STATUS_INDETERMINATE = 8,
  MOB_STATUS_UNKNOWN_ENTRY = 9,
  MOB_STATUS_CATALOG = 10,
  MOB_STATUS_INTERNAL = 11,
} MobStatus;

/**
 * A loaded catalog.
 */
typedef struct MobCatalog MobCatalog;

/**
 * A parsed integrand plus its parameter bindings.
 */
typedef struct MobIntegrand MobIntegrand;

typedef struct MobComplex {
  double re;
  double im;
} MobComplex;

typedef struct MobQuadrature {
  double value;
  double est_error;
  size_t evaluations;
  bool converged;
} MobQuadrature;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library on this thread.
 */
const char *mob_last_error(void);

/**
 * Library version as a static string.
 */
const char *mob_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed; null is allowed.
 */
void mob_string_free(char *s);

/**
 * Complex gamma function.
 *
 * # Safety
 * `result` must be valid for writes.
 */
enum MobStatus mob_gamma(struct MobComplex z, struct MobComplex *result);

/**
 * Gauss hypergeometric function 2F1(a, b; c; z) with real parameters.
 *
 * # Safety
 * `result` must be valid for writes.
 */
enum MobStatus mob_hyp2f1(double a,
                          double b,
                          double c,
                          struct MobComplex z,
                          struct MobComplex *result);

/**
 * Parses an integrand such as `(a*x^2 + 2*b*x + c)^(-n)`.
 *
 * # Safety
 * `source` must be a nul-terminated string and `handle` valid for writes.
 */
enum MobStatus mob_integrand_parse(const char *source, struct MobIntegrand **handle);

/**
 * Binds a parameter to a complex value, replacing any earlier binding.
 *
 * # Safety
 * `handle` must come from [`mob_integrand_parse`]; `name` must be a
 * nul-terminated string.
 */
enum MobStatus mob_integrand_bind(struct MobIntegrand *handle,
                                  const char *name,
                                  struct MobComplex value);

/**
 * Runs the bracket engine and writes the combined value. Returns
 * `MOB_STATUS_INDETERMINATE` when no solution converges or some could not be
 * classified, still writing the partial value when there is one.
 *
 * # Safety
 * `handle` must come from [`mob_integrand_parse`]; `result` must be valid
 * for writes.
 */
enum MobStatus mob_integrand_evaluate(const struct MobIntegrand *handle, struct MobComplex *result);

/**
 * Full engine report as JSON. Free the string with [`mob_string_free`].
 *
 * # Safety
 * `handle` must come from [`mob_integrand_parse`]; `json` must be valid for
 * writes.
 */
enum MobStatus mob_integrand_report_json(const struct MobIntegrand *handle, char **json);

/**
 * # Safety
 * `handle` must come from [`mob_integrand_parse`] and not have been freed;
 * null is allowed.
 */
void mob_integrand_free(struct MobIntegrand *handle);

/**
 * Loads the catalog, honouring `MOB_CATALOG`.
 *
 * # Safety
 * `handle` must be valid for writes.
 */
enum MobStatus mob_catalog_load(struct MobCatalog **handle);

/**
 * Closed form of `id` (or `id/branch`) at the given parameters.
 *
 * # Safety
 * `catalog` must come from [`mob_catalog_load`]; `names` and `values` must
 * each point to `len` elements; `result` must be valid for writes.
 */
enum MobStatus mob_catalog_eval(const struct MobCatalog *catalog,
                                const char *id,
                                const char *const *names,
                                const double *values,
                                size_t len,
                                struct MobComplex *result);

/**
 * Cross-check report as JSON; `verdict` receives the CLI exit code
 * (0 pass, 1 fail or error, 2 indeterminate).
 *
 * # Safety
 * As [`mob_catalog_eval`]; `json` and `verdict` must be valid for writes.
 */
enum MobStatus mob_catalog_crosscheck_json(const struct MobCatalog *catalog,
                                           const char *id,
                                           const char *const *names,
                                           const double *values,
                                           size_t len,
                                           char **json,
                                           int32_t *verdict);

/**
 * # Safety
 * `catalog` must come from [`mob_catalog_load`] and not have been freed;
 * null is allowed.
 */
void mob_catalog_free(struct MobCatalog *catalog);

/**
 * Integrates `f(x, user)` over `(0, inf)` to relative tolerance `tol`. On
 * `MOB_STATUS_NOT_CONVERGED` the last estimate is still written.
 *
 * # Safety
 * `f` must be safe to call with `user` from this thread; `result` must be
 * valid for writes.
 */
enum MobStatus mob_quad_halfline(double (*f)(double, void*),
                                 void *user,
                                 double tol,
                                 struct MobQuadrature *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOB_H */
