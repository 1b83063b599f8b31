/* C interface of the multilayer Petrov-Galerkin solver library.
 *
 * Objects are opaque handles created by the create and run calls and released
 * with the matching destroy call. Every fallible call returns an mlpg_status; the text of
 * the most recent failure on the calling thread is available through
 * mlpg_last_error(). */
#ifndef MLPG_MLPG_H
#define MLPG_MLPG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MLPG_API __declspec(dllexport)
#else
#define MLPG_API __attribute__((visibility("default")))
#endif

typedef enum mlpg_status {
  MLPG_OK = 0,
  MLPG_ERR_INVALID_ARGUMENT = 1,
  MLPG_ERR_INVALID_LAYER_COUNT = 2,
  MLPG_ERR_UNSUPPORTED_LAYER_COUNT = 3,
  MLPG_ERR_MESH_TOO_COARSE = 4,
  MLPG_ERR_ETA_CONDITION_VIOLATED = 5,
  MLPG_ERR_G_NOT_ZERO_ON_BOUNDARY = 6,
  MLPG_ERR_WRONG_SPACE_TAG = 7,
  MLPG_ERR_LAYOUT_MISMATCH = 8,
  MLPG_ERR_SINGULAR_DIAGONAL_BLOCK = 9,
  MLPG_ERR_SINGULAR_MATRIX = 10,
  MLPG_ERR_TOO_LARGE = 11,
  MLPG_ERR_UNKNOWN_TEST_ID = 12,
  MLPG_ERR_IO = 13,
  MLPG_ERR_INTERNAL = 99
} mlpg_status;

typedef enum mlpg_variant {
  MLPG_DIRICHLET_FLAT = 0,
  MLPG_NONFLAT = 1,
  MLPG_NEUMANN = 2
} mlpg_variant;

typedef enum mlpg_solver_kind {
  MLPG_SOLVER_JACOBI = 0,
  MLPG_SOLVER_GMRES_JACOBI = 1,
  MLPG_SOLVER_MONOLITHIC = 2
} mlpg_solver_kind;

typedef enum mlpg_rhs_mode { MLPG_RHS_TENSORIZED = 0, MLPG_RHS_LAYER_AVERAGED = 1 } mlpg_rhs_mode;

/* Error pair reported as err_L2h/err_H1h: the exact solution sampled at layer
 * midpoints (continuous in x), or the coefficients of the layer-mean
 * interpolant. */
typedef enum mlpg_error_metric { MLPG_METRIC_SAMPLED = 0, MLPG_METRIC_INTERPOLANT = 1 } mlpg_error_metric;

typedef struct mlpg_problem mlpg_problem;
typedef struct mlpg_solution mlpg_solution;
typedef struct mlpg_report mlpg_report;
typedef struct mlpg_stability mlpg_stability;

/* Model problem on a given resolution. The test id fixes the variant:
 * 1 flat Dirichlet, 2 non-flat surface, 3 top Neumann. */
typedef struct mlpg_problem_config {
  int test_id;
  int layers;         /* N */
  int cells_per_side; /* NH */
  int dim;            /* horizontal dimension, 2 for the model problems */
  double epsilon;     /* surface amplitude of test 2 */
  int rhs_mode;       /* mlpg_rhs_mode */
  int strict_eta;     /* 1: |grad eta| >= 1 is an error, 0: warning, -1: by test */
  int error_metric;   /* mlpg_error_metric */
} mlpg_problem_config;

typedef struct mlpg_solver_config {
  int solver; /* mlpg_solver_kind */
  double tol;
  int max_outer;
  int restart;
  int workers;
} mlpg_solver_config;

typedef struct mlpg_solve_stats {
  int converged;
  int outer_iterations;
  double relative_residual;
  double assembly_seconds;
  double factorization_seconds;
  double solve_seconds;
} mlpg_solve_stats;

typedef struct mlpg_study_row {
  int layers;
  int cells_per_side;
  double err_L2h;
  double err_H1h;
  double err_L2_quad;
  double sampled_L2h, sampled_H1h;
  double interp_L2h, interp_H1h;
  int has_order; /* 0 on the first row */
  double ord_L2;
  double ord_H1;
  int outer_iterations;
  int converged;
  double assembly_seconds;
  double solve_seconds;
} mlpg_study_row;

typedef struct mlpg_stability_config {
  int variant; /* mlpg_variant */
  int layers;
  int cells_per_side;
  int dim;
  int samples;
  uint64_t seed;
  int infsup_layers;
  int infsup_cells_per_side;
  double slack;
} mlpg_stability_config;

typedef struct mlpg_stability_values {
  double equivalence_min, equivalence_max;
  double equivalence_bound_min, equivalence_bound_max;
  double coercivity_min, coercivity_bound;    /* bound NaN when not applicable */
  double continuity_max, continuity_bound;    /* max of |a(v,phi)| / norms */
  int has_inf_sup;
  double inf_sup, inf_sup_bound;
  int equivalence_violations;
  int coercivity_violations;
  int continuity_violations;
  int passed;
} mlpg_stability_values;

MLPG_API const char* mlpg_last_error(void);
MLPG_API const char* mlpg_status_string(mlpg_status status);
MLPG_API const char* mlpg_variant_name(int variant);

MLPG_API void mlpg_problem_config_default(mlpg_problem_config* config);
MLPG_API void mlpg_solver_config_default(mlpg_solver_config* config);
MLPG_API void mlpg_stability_config_default(mlpg_stability_config* config);

/* Builds the discretization and assembles the system. */
MLPG_API mlpg_status mlpg_problem_create(const mlpg_problem_config* config, mlpg_problem** out);
MLPG_API void mlpg_problem_destroy(mlpg_problem* problem);
MLPG_API mlpg_status mlpg_problem_info(const mlpg_problem* problem, int* variant, int* layers,
                                       size_t* ndof);
MLPG_API size_t mlpg_problem_warning_count(const mlpg_problem* problem);
MLPG_API const char* mlpg_problem_warning(const mlpg_problem* problem, size_t index);

/* A solve that stops before reaching the tolerance still returns MLPG_OK;
 * check mlpg_solve_stats.converged. */
MLPG_API mlpg_status mlpg_solve(const mlpg_problem* problem, const mlpg_solver_config* config,
                                mlpg_solution** out);
MLPG_API void mlpg_solution_destroy(mlpg_solution* solution);
MLPG_API mlpg_status mlpg_solution_stats(const mlpg_solution* solution, mlpg_solve_stats* out);
MLPG_API size_t mlpg_solution_size(const mlpg_solution* solution);
MLPG_API mlpg_status mlpg_solution_copy(const mlpg_solution* solution, double* out, size_t count);
/* Relative errors in the configured metric, and the L2 error against the
 * exact solution by tensor quadrature. */
MLPG_API mlpg_status mlpg_solution_errors(const mlpg_problem* problem,
                                          const mlpg_solution* solution, double* err_L2h,
                                          double* err_H1h, double* err_L2_quad);
MLPG_API mlpg_status mlpg_solution_write_csv(const mlpg_problem* problem,
                                             const mlpg_solution* solution, const char* path);
/* snprintf-style: returns the full length, writes at most capacity-1 chars. */
MLPG_API size_t mlpg_solution_stats_csv(const mlpg_solution* solution, int header, char* buffer,
                                        size_t capacity);
MLPG_API size_t mlpg_solution_stats_json(const mlpg_solution* solution, char* buffer,
                                         size_t capacity);

/* Convergence study over `count` resolutions (layers[i], cells_per_side[i]);
 * the resolution fields of `problem` are ignored. */
MLPG_API mlpg_status mlpg_study_run(const mlpg_problem_config* problem, const int* layers,
                                    const int* cells_per_side, size_t count,
                                    const mlpg_solver_config* solver, mlpg_report** out);
MLPG_API void mlpg_report_destroy(mlpg_report* report);
MLPG_API size_t mlpg_report_row_count(const mlpg_report* report);
MLPG_API mlpg_status mlpg_report_row(const mlpg_report* report, size_t index, mlpg_study_row* out);
MLPG_API int mlpg_report_all_converged(const mlpg_report* report);
MLPG_API size_t mlpg_report_warning_count(const mlpg_report* report);
MLPG_API const char* mlpg_report_warning(const mlpg_report* report, size_t index);
MLPG_API size_t mlpg_report_csv(const mlpg_report* report, int with_timings, char* buffer,
                                size_t capacity);

MLPG_API mlpg_status mlpg_stability_run(const mlpg_stability_config* config,
                                        mlpg_stability** out);
MLPG_API void mlpg_stability_destroy(mlpg_stability* stability);
MLPG_API mlpg_status mlpg_stability_values_get(const mlpg_stability* stability,
                                               mlpg_stability_values* out);
MLPG_API size_t mlpg_stability_text(const mlpg_stability* stability, char* buffer,
                                    size_t capacity);

#ifdef __cplusplus
}
#endif

#endif /* MLPG_MLPG_H */
