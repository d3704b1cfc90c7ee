#ifndef FDRD_H
#define FDRD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum FdrdStatus {
  FDRD_STATUS_OK = 0,
  FDRD_STATUS_NULL_POINTER = 1,
  // Bad parameters, violated constraint or malformed configuration.
  FDRD_STATUS_INVALID_ARGUMENT = 2,
  // A series, quadrature or solver failed to reach its tolerance.
  FDRD_STATUS_NUMERICAL = 3,
  FDRD_STATUS_IO = 4,
  // The output buffer is too small; the required length was written.
  FDRD_STATUS_BUFFER_TOO_SMALL = 5,
  FDRD_STATUS_PANIC = 6,
} FdrdStatus;

// Coefficient problem for one mode: `D^alpha A = lambda A + sum delta_i A(t - tau_i) + c0`.
typedef struct FdrdProblem FdrdProblem;

// Assembled solution `u(x, t)`.
typedef struct FdrdSolution FdrdSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message of this thread into `buf` (NUL-terminated).
//
// Returns the message length excluding the terminator, or 0 when there is
// no error. The message is truncated when `len` is too small.
//
// # Safety
// `buf` must be valid for `len` bytes or be null with `len == 0`.
size_t fdrd_last_error(char *buf, size_t len);

// Three-parameter Mittag-Leffler function `E^gamma_{alpha,beta}(z)`.
//
// # Safety
// `out` must be a valid pointer to a `double`.
enum FdrdStatus fdrd_prabhakar(double alpha, double beta, double gamma, double z, double *out);

// Create a coefficient problem with a polynomial history
// `phi(t) = sum history[k] t^k` on `[-max tau, 0]`.
//
// # Safety
// `taus` and `deltas` must hold `n_delays` values, `history` must hold
// `n_history` values, and `out` must be a valid pointer.
enum FdrdStatus fdrd_problem_new(double alpha,
                                 double lambda,
                                 double c0,
                                 const double *taus,
                                 const double *deltas,
                                 size_t n_delays,
                                 const double *history,
                                 size_t n_history,
                                 struct FdrdProblem **out);

// Evaluate the coefficient `A(t)` (the history for `t <= 0`).
//
// # Safety
// `problem` must come from [`fdrd_problem_new`] and `out` must be valid.
enum FdrdStatus fdrd_problem_eval(const struct FdrdProblem *problem, double t, double *out);

// # Safety
// `problem` must come from [`fdrd_problem_new`] or be null, and must not be
// used afterwards.
void fdrd_problem_free(struct FdrdProblem *problem);

// Build a named solution (for example `"trig3d_H1"`). `params_json` may be
// null for the default parameters, otherwise it is a JSON object with the
// fields `alpha, a, b, c1, c0, delays, histories` (and optional `reaction`).
//
// # Safety
// `name` and a non-null `params_json` must be NUL-terminated strings and
// `out` must be valid.
enum FdrdStatus fdrd_solution_new(const char *name,
                                  const char *params_json,
                                  struct FdrdSolution **out);

// Dimension of the solution's invariant subspace.
//
// # Safety
// `solution` must come from [`fdrd_solution_new`] and `out` must be valid.
enum FdrdStatus fdrd_solution_dim(const struct FdrdSolution *solution, size_t *out);

// Evaluate `u(x, t)`.
//
// # Safety
// `solution` must come from [`fdrd_solution_new`] and `out` must be valid.
enum FdrdStatus fdrd_solution_eval(const struct FdrdSolution *solution,
                                   double x,
                                   double t,
                                   double *out);

// Write the coefficients `A_1(t) .. A_n(t)` into `buf`. When `len` is
// smaller than the dimension, the dimension is written to `needed` and
// `BufferTooSmall` is returned. `needed` may be null.
//
// # Safety
// `buf` must be valid for `len` doubles; `needed` must be valid or null.
enum FdrdStatus fdrd_solution_coefficients(const struct FdrdSolution *solution,
                                           double t,
                                           double *buf,
                                           size_t len,
                                           size_t *needed);

// # Safety
// `solution` must come from [`fdrd_solution_new`] or be null, and must not
// be used afterwards.
void fdrd_solution_free(struct FdrdSolution *solution);

// Run a JSON run configuration (the format accepted by `fdrd --config`)
// and write its output files into `out_dir`.
//
// # Safety
// Both arguments must be NUL-terminated strings.
enum FdrdStatus fdrd_run_config(const char *config_json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FDRD_H */
