#ifndef RKOPT_H
#define RKOPT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Method selector for `RkoOptions::method`: the full portfolio.
 */
#define RKO_PORTFOLIO -1

typedef enum RkoStatus {
  RKO_STATUS_OK = 0,
  RKO_STATUS_NULL_POINTER = 1,
  RKO_STATUS_INVALID_ARGUMENT = 2,
  RKO_STATUS_DIMENSION_MISMATCH = 3,
  RKO_STATUS_PARSE_ERROR = 4,
  RKO_STATUS_IO_ERROR = 5,
  RKO_STATUS_INFEASIBLE = 6,
  RKO_STATUS_TOO_LARGE = 7,
  RKO_STATUS_PANIC = 8,
} RkoStatus;

/**
 * A loaded problem instance.
 */
typedef struct RkoProblem RkoProblem;

/**
 * Outcome of a solve.
 */
typedef struct RkoResult RkoResult;

/**
 * Run settings. A non-positive `time_limit` and a zero `max_evaluations`
 * mean "unset"; at least one must be set.
 */
typedef struct RkoOptions {
  uint64_t seed;
  double time_limit;
  uint64_t max_evaluations;
  /**
   * `RKO_PORTFOLIO`, or 0..7 for BRKGA, GA, SA, GRASP, ILS, VNS, PSO, LNS.
   */
  int32_t method;
  bool q_learning;
  /**
   * Run portfolio solvers on separate threads.
   */
  bool parallel;
} RkoOptions;

typedef struct RkoFitness {
  double objective;
  double penalty;
  bool feasible;
} RkoFitness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message of this thread, or null. Valid until the next failing
 * call on the same thread.
 */
const char *rko_last_error(void);

/**
 * Static version string.
 */
const char *rko_version(void);

/**
 * Default options: seed 1, 10 s, portfolio on threads, table parameters.
 */
struct RkoOptions rko_options_default(void);

/**
 * Loads an instance. `problem` is one of "tsp", "setcover", "anpmp",
 * "ncgpp", "thlp"; `alpha` is used by the p-median family only.
 *
 * # Safety
 * `problem` and `path` are NUL-terminated strings; `out` is writable.
 */
enum RkoStatus rko_problem_load(const char *problem,
                                const char *path,
                                size_t alpha,
                                struct RkoProblem **out);

/**
 * # Safety
 * `problem` is null or a handle from `rko_problem_load` not yet freed.
 */
void rko_problem_free(struct RkoProblem *problem);

/**
 * Number of keys a solution vector of `problem` carries.
 *
 * # Safety
 * `problem` is a live handle; `out` is writable.
 */
enum RkoStatus rko_problem_dimension(const struct RkoProblem *problem, size_t *out);

/**
 * Decodes one key vector.
 *
 * # Safety
 * `keys` points to `n` doubles; `out` is writable.
 */
enum RkoStatus rko_problem_evaluate(const struct RkoProblem *problem,
                                    const double *keys,
                                    size_t n,
                                    struct RkoFitness *out);

/**
 * Exact optimum of a tiny instance by enumeration.
 *
 * # Safety
 * `problem` is a live handle; `out` is writable.
 */
enum RkoStatus rko_problem_brute_force(const struct RkoProblem *problem, double *out);

/**
 * Solves a loaded instance with the tuned parameters of its problem.
 *
 * # Safety
 * `problem` is a live handle; `opts` is null (defaults) or valid; `out` is
 * writable.
 */
enum RkoStatus rko_solve(const struct RkoProblem *problem,
                         const struct RkoOptions *opts,
                         struct RkoResult **out);

/**
 * Solves a problem given by a decoder callback, with the p-median
 * parameter table.
 *
 * # Safety
 * `decode` must be safe to call with `user` for the whole run (from several
 * threads when `opts->parallel` is set); `out` is writable.
 */
enum RkoStatus rko_solve_callback(size_t dimension,
                                  struct RkoFitness (*decode)(const double *keys,
                                                              size_t n,
                                                              void *user),
                                  void *user,
                                  const struct RkoOptions *opts,
                                  struct RkoResult **out);

/**
 * # Safety
 * `result` is null or a handle from a solve call not yet freed.
 */
void rko_result_free(struct RkoResult *result);

/**
 * Best fitness found.
 *
 * # Safety
 * `result` is a live handle; `out` is writable.
 */
enum RkoStatus rko_result_fitness(const struct RkoResult *result, struct RkoFitness *out);

/**
 * Seconds to the best solution and total evaluations.
 *
 * # Safety
 * `result` is a live handle; each output pointer is null or writable.
 */
enum RkoStatus rko_result_stats(const struct RkoResult *result,
                                double *time_to_best,
                                uint64_t *evaluations);

/**
 * Copies the best key vector into `buf`. `len` receives the dimension;
 * `buf` may be null to query it.
 *
 * # Safety
 * `buf` is null or holds `cap` doubles; `len` is writable.
 */
enum RkoStatus rko_result_keys(const struct RkoResult *result,
                               double *buf,
                               size_t cap,
                               size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RKOPT_H */
