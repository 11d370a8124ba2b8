/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef WLDOS_H
#define WLDOS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WldosStatus {
  WLDOS_STATUS_OK = 0,
  WLDOS_STATUS_NULL_POINTER = 1,
  WLDOS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Problem size above a solver cap.
   */
  WLDOS_STATUS_CAP_EXCEEDED = 3,
  /**
   * Output buffer too small; the required length is reported.
   */
  WLDOS_STATUS_BUFFER_TOO_SMALL = 4,
  WLDOS_STATUS_NO_CONVERGENCE = 5,
  WLDOS_STATUS_INTERNAL = 6,
  WLDOS_STATUS_PANIC = 7,
} WldosStatus;

typedef enum WldosRegion {
  WLDOS_REGION_FULL = 0,
  WLDOS_REGION_BULK = 1,
  WLDOS_REGION_EDGE = 2,
} WldosRegion;

typedef enum WldosMethod {
  WLDOS_METHOD_DENSE = 0,
  WLDOS_METHOD_KPM = 1,
  WLDOS_METHOD_TRUNCATED = 2,
} WldosMethod;

/**
 * Opaque model handle.
 */
typedef struct WldosModel WldosModel;

/**
 * Window and method parameters for wLDOS evaluation.
 */
typedef struct WldosParams {
  /**
   * Energy window `exp(-(eta_inv xi)^2)`.
   */
  double eta_inv;
  /**
   * Position window scale; support `[-2/kappa, 2/kappa]`.
   */
  double kappa;
  enum WldosMethod method;
  /**
   * Polynomial degree (KPM only).
   */
  size_t order;
  /**
   * Truncation parameter (truncated method only).
   */
  double alpha;
} WldosParams;

typedef struct WldosValue {
  double value;
  double budget_polynomial;
  double budget_truncation;
} WldosValue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *wldos_version(void);

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into the library from this thread.
 */
const char *wldos_last_error_message(void);

/**
 * Fibonacci SSH chain at substitution `stage`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum WldosStatus wldos_model_fibonacci(uint32_t stage,
                                       double t_o,
                                       double t_i_s,
                                       double t_i_l,
                                       bool periodic,
                                       struct WldosModel **out);

/**
 * Uniform SSH chain with `n_cells` unit cells.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum WldosStatus wldos_model_periodic(size_t n_cells,
                                      double t_o,
                                      double t_i,
                                      bool periodic,
                                      struct WldosModel **out);

/**
 * Dirichlet segment of the Fibonacci SSH chain: `|x| <= rho` for the bulk,
 * `0 <= x <= rho` for the edge.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum WldosStatus wldos_model_segment(double t_o,
                                     double t_i_s,
                                     double t_i_l,
                                     enum WldosRegion region,
                                     double rho,
                                     struct WldosModel **out);

/**
 * Releases a model. NULL is ignored.
 *
 * # Safety
 * `model` must come from a `wldos_model_*` constructor and not be used
 * afterwards.
 */
void wldos_model_free(struct WldosModel *model);

/**
 * Number of orbitals (the Hamiltonian dimension).
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writing.
 */
enum WldosStatus wldos_model_n_orbitals(const struct WldosModel *model, size_t *out);

/**
 * Copies the per-orbital positions into `buf`. `written` receives the
 * number of orbitals, also when `len` is too small.
 *
 * # Safety
 * `buf` must be valid for `len` writes; `written` may be NULL.
 */
enum WldosStatus wldos_model_positions(const struct WldosModel *model,
                                       double *buf,
                                       size_t len,
                                       size_t *written);

/**
 * Eigenvalues in ascending order; see [`wldos_model_positions`] for the
 * buffer protocol.
 *
 * # Safety
 * `buf` must be valid for `len` writes; `written` may be NULL.
 */
enum WldosStatus wldos_spectrum(const struct WldosModel *model,
                                double *buf,
                                size_t len,
                                size_t *written);

/**
 * Integrated density of states at `n` energies.
 *
 * # Safety
 * `energies` and `out` must be valid for `n` elements.
 */
enum WldosStatus wldos_idos(const struct WldosModel *model,
                            const double *energies,
                            size_t n,
                            double *out);

/**
 * wLDOS at one point `(x, energy)`.
 *
 * # Safety
 * `params` must point to a valid struct and `out` be valid for writing.
 */
enum WldosStatus wldos_evaluate(const struct WldosModel *model,
                                const struct WldosParams *params,
                                double x,
                                double energy,
                                struct WldosValue *out);

/**
 * wLDOS on the grid `xs x energies`, row-major in `x` (`out[i * ne + k]`
 * belongs to `(xs[i], energies[k])`). `threads = 0` uses every core.
 *
 * # Safety
 * `xs`, `energies` must hold `nx`, `ne` values and `out` `nx * ne`.
 */
enum WldosStatus wldos_grid(const struct WldosModel *model,
                            const struct WldosParams *params,
                            const double *xs,
                            size_t nx,
                            const double *energies,
                            size_t ne,
                            size_t threads,
                            struct WldosValue *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WLDOS_H */
