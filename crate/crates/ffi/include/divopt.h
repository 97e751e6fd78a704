#ifndef DIVOPT_H
#define DIVOPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/*
 Status codes. Zero is success.
 */
typedef enum DivoptStatus {
  DIVOPT_STATUS_OK = 0,
  DIVOPT_STATUS_NULL_POINTER = 1,
  DIVOPT_STATUS_INVALID_ARGUMENT = 2,
  DIVOPT_STATUS_INVALID_MODEL = 3,
  DIVOPT_STATUS_DOMAIN = 4,
  DIVOPT_STATUS_ROOT = 5,
  DIVOPT_STATUS_INVALID_PAIR = 6,
  DIVOPT_STATUS_SOLVER = 7,
  DIVOPT_STATUS_QUADRATURE = 8,
  DIVOPT_STATUS_SIMULATION = 9,
  DIVOPT_STATUS_CONFIG = 10,
  DIVOPT_STATUS_PANIC = 11,
} DivoptStatus;

/*
 A surplus model together with decision rate `gamma` and discount `delta`.
 */
typedef struct DivoptProblem DivoptProblem;

/*
 Optimal barriers and the value function they induce.
 */
typedef struct DivoptSolution DivoptSolution;

/*
 Barrier levels of a solved problem.
 */
typedef struct DivoptBarriers {
  double b_bar;
  double b_star;
  double b_u_star;
  double b_l_star;
  double kappa;
  /*
   `b_l* = 0`: pay everything at the first decision time above `b_u*`.
   */
  bool liquidation;
} DivoptBarriers;

/*
 Monte Carlo estimate.
 */
typedef struct DivoptEstimate {
  double mean;
  double std_error;
  uint64_t n_paths;
  uint64_t n_ruined;
  double truncation_bound;
} DivoptEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the most recent failure on this thread; empty if none. The
 pointer stays valid until the next failing call on the same thread.
 */
const char *divopt_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *divopt_version(void);

/*
 Builds a problem from drift `c`, volatility `sigma`, claim intensity
 `lambda`, `n_phases` mixture weights and rates, decision rate `gamma` and
 discount rate `delta`.

 # Safety
 `weights` and `rates` must point to `n_phases` readable doubles (they may be
 null when `n_phases == 0`); `out` must be a valid pointer.
 */
enum DivoptStatus divopt_problem_new(double c,
                                     double sigma,
                                     double lambda,
                                     const double *weights,
                                     const double *rates,
                                     size_t n_phases,
                                     double gamma,
                                     double delta,
                                     struct DivoptProblem **out);

/*
 Releases a problem. Null is ignored.

 # Safety
 `problem` must come from [`divopt_problem_new`] and not have been freed.
 */
void divopt_problem_free(struct DivoptProblem *problem);

/*
 Solves for the optimal barriers under fixed cost `kappa > 0`.

 # Safety
 `problem` must be a live handle and `out` a valid pointer.
 */
enum DivoptStatus divopt_solve(const struct DivoptProblem *problem,
                               double kappa,
                               struct DivoptSolution **out);

/*
 Releases a solution. Null is ignored.

 # Safety
 `solution` must come from [`divopt_solve`] and not have been freed.
 */
void divopt_solution_free(struct DivoptSolution *solution);

/*
 Copies the barrier levels of a solution.

 # Safety
 `solution` must be a live handle and `out` a valid pointer.
 */
enum DivoptStatus divopt_solution_barriers(const struct DivoptSolution *solution,
                                           struct DivoptBarriers *out);

/*
 Optimal value (`order == 0`) or its first or second derivative at `x`.
 Derivatives at `b_u*` are taken from the right.

 # Safety
 `solution` must be a live handle and `out` a valid pointer.
 */
enum DivoptStatus divopt_solution_value(const struct DivoptSolution *solution,
                                        double x,
                                        uint32_t order,
                                        double *out);

/*
 Value at `x` of the strategy paying down to `b_l` whenever the surplus is at
 least `b_u` at a decision time, each payment costing `kappa`.

 # Safety
 `problem` must be a live handle and `out` a valid pointer.
 */
enum DivoptStatus divopt_pair_value(const struct DivoptProblem *problem,
                                    double b_u,
                                    double b_l,
                                    double kappa,
                                    double x,
                                    double *out);

/*
 Monte Carlo estimate of the same strategy value from `x0`, with `n_paths`
 paths and the given seed. Deterministic for fixed inputs.

 # Safety
 `problem` must be a live handle and `out` a valid pointer.
 */
enum DivoptStatus divopt_simulate_pair(const struct DivoptProblem *problem,
                                       double b_u,
                                       double b_l,
                                       double kappa,
                                       double x0,
                                       uint64_t n_paths,
                                       uint64_t seed,
                                       struct DivoptEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIVOPT_H */
