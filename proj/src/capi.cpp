#include "mlpg/mlpg.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "mlpg/error.hpp"
#include "mlpg/verify.hpp"

struct mlpg_problem {
  mlpg::ManufacturedProblem problem;
  mlpg::ErrorMetric metric = mlpg::ErrorMetric::sampled;
  mlpg::Discretization disc;
  mlpg::BlockTridiagonalSystem system;
};

struct mlpg_solution {
  mlpg::SolveResult result;
};

struct mlpg_report {
  mlpg::ConvergenceReport report;
};

struct mlpg_stability {
  mlpg::StabilityReport report;
};

namespace {

thread_local std::string last_error;

mlpg_status set_error(mlpg_status status, const std::string& message) {
  last_error = message;
  return status;
}

mlpg_status status_of(mlpg::ErrorCode code) { return static_cast<mlpg_status>(code); }

// Runs `body`, translating exceptions into status codes.
template <class Body>
mlpg_status guarded(Body&& body) {
  try {
    body();
    last_error.clear();
    return MLPG_OK;
  } catch (const mlpg::Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(MLPG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(MLPG_ERR_INTERNAL, e.what());
  }
}

size_t copy_out(const std::string& text, char* buffer, size_t capacity) {
  if (buffer && capacity > 0) {
    const size_t n = std::min(text.size(), capacity - 1);
    std::memcpy(buffer, text.data(), n);
    buffer[n] = '\0';
  }
  return text.size();
}

mlpg::ManufacturedProblem make_problem(const mlpg_problem_config& c) {
  mlpg::ManufacturedProblem p = mlpg::manufactured(c.test_id, c.epsilon);
  if (c.strict_eta == 1) p.eta_check = mlpg::EtaCheck::strict;
  if (c.strict_eta == 0) p.eta_check = mlpg::EtaCheck::warn;
  return p;
}

// The model problems vanish identically on the line y = 0, so only the
// square is meaningful for them.
void check_dim(int dim) {
  if (dim != 2) {
    throw mlpg::Error(mlpg::ErrorCode::invalid_argument,
                      "the model problems are posed on the unit square; dim must be 2");
  }
}

mlpg::ErrorMetric metric_of(int m) {
  switch (m) {
    case MLPG_METRIC_SAMPLED: return mlpg::ErrorMetric::sampled;
    case MLPG_METRIC_INTERPOLANT: return mlpg::ErrorMetric::interpolant;
    default: throw mlpg::Error(mlpg::ErrorCode::invalid_argument, "unknown error metric");
  }
}

mlpg::AssemblyOptions assembly_options(const mlpg_problem_config& c) {
  mlpg::AssemblyOptions opts;
  if (c.rhs_mode == MLPG_RHS_LAYER_AVERAGED) opts.rhs = mlpg::RhsMode::layer_averaged;
  else if (c.rhs_mode != MLPG_RHS_TENSORIZED) {
    throw mlpg::Error(mlpg::ErrorCode::invalid_argument, "unknown rhs mode");
  }
  return opts;
}

mlpg::SolverOptions solver_options(const mlpg_solver_config& c) {
  mlpg::SolverOptions o;
  o.tol = c.tol;
  o.max_outer = c.max_outer;
  o.restart = c.restart;
  o.workers = c.workers;
  if (c.workers < 1) throw mlpg::Error(mlpg::ErrorCode::invalid_argument, "workers must be >= 1");
  return o;
}

mlpg::SolverKind solver_kind(int kind) {
  switch (kind) {
    case MLPG_SOLVER_JACOBI: return mlpg::SolverKind::jacobi;
    case MLPG_SOLVER_GMRES_JACOBI: return mlpg::SolverKind::gmres_jacobi;
    case MLPG_SOLVER_MONOLITHIC: return mlpg::SolverKind::monolithic;
    default: throw mlpg::Error(mlpg::ErrorCode::invalid_argument, "unknown solver kind");
  }
}

mlpg::Variant variant_of(int v) {
  switch (v) {
    case MLPG_DIRICHLET_FLAT: return mlpg::Variant::dirichlet_flat;
    case MLPG_NONFLAT: return mlpg::Variant::nonflat;
    case MLPG_NEUMANN: return mlpg::Variant::neumann;
    default: throw mlpg::Error(mlpg::ErrorCode::invalid_argument, "unknown variant");
  }
}

#define MLPG_REQUIRE(cond, msg)                                 \
  do {                                                          \
    if (!(cond)) return set_error(MLPG_ERR_INVALID_ARGUMENT, msg); \
  } while (0)

}  // namespace

extern "C" {

const char* mlpg_last_error(void) { return last_error.c_str(); }

const char* mlpg_status_string(mlpg_status status) {
  if (status == MLPG_OK) return "ok";
  if (status == MLPG_ERR_INTERNAL) return "internal-error";
  if (status >= MLPG_ERR_INVALID_ARGUMENT && status <= MLPG_ERR_IO) {
    return mlpg::to_string(static_cast<mlpg::ErrorCode>(status));
  }
  return "unknown-status";
}

const char* mlpg_variant_name(int variant) {
  try {
    return mlpg::to_string(variant_of(variant));
  } catch (...) {
    return "?";
  }
}

void mlpg_problem_config_default(mlpg_problem_config* c) {
  if (!c) return;
  *c = {};
  c->test_id = 1;
  c->layers = 10;
  c->cells_per_side = 10;
  c->dim = 2;
  c->epsilon = 0.15;
  c->rhs_mode = MLPG_RHS_TENSORIZED;
  c->strict_eta = -1;
  c->error_metric = MLPG_METRIC_SAMPLED;
}

void mlpg_solver_config_default(mlpg_solver_config* c) {
  if (!c) return;
  const mlpg::SolverOptions d;
  c->solver = MLPG_SOLVER_GMRES_JACOBI;
  c->tol = d.tol;
  c->max_outer = d.max_outer;
  c->restart = d.restart;
  c->workers = d.workers;
}

void mlpg_stability_config_default(mlpg_stability_config* c) {
  if (!c) return;
  const mlpg::StabilityOptions d;
  c->variant = MLPG_DIRICHLET_FLAT;
  c->layers = d.layers;
  c->cells_per_side = d.cells_per_side;
  c->dim = d.dim;
  c->samples = d.samples;
  c->seed = d.seed;
  c->infsup_layers = d.infsup_layers;
  c->infsup_cells_per_side = d.infsup_cells_per_side;
  c->slack = d.slack;
}

mlpg_status mlpg_problem_create(const mlpg_problem_config* config, mlpg_problem** out) {
  MLPG_REQUIRE(config && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    check_dim(config->dim);
    auto p = std::make_unique<mlpg_problem>();
    p->problem = make_problem(*config);
    p->metric = metric_of(config->error_metric);
    p->disc = mlpg::make_discretization(p->problem.height, config->layers, config->dim,
                                        config->cells_per_side);
    p->system = mlpg::assemble_problem(p->problem, p->disc, assembly_options(*config));
    *out = p.release();
  });
}

void mlpg_problem_destroy(mlpg_problem* problem) { delete problem; }

mlpg_status mlpg_problem_info(const mlpg_problem* p, int* variant, int* layers, size_t* ndof) {
  MLPG_REQUIRE(p, "null problem");
  if (variant) *variant = static_cast<int>(p->problem.variant);
  if (layers) *layers = p->disc.layers();
  if (ndof) *ndof = p->disc.ndof();
  return MLPG_OK;
}

size_t mlpg_problem_warning_count(const mlpg_problem* p) {
  return p ? p->system.warnings.size() : 0;
}

const char* mlpg_problem_warning(const mlpg_problem* p, size_t i) {
  return p && i < p->system.warnings.size() ? p->system.warnings[i].c_str() : nullptr;
}

mlpg_status mlpg_solve(const mlpg_problem* p, const mlpg_solver_config* config,
                       mlpg_solution** out) {
  MLPG_REQUIRE(p && config && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<mlpg_solution>(mlpg_solution{
        mlpg::solve(p->system, solver_kind(config->solver), solver_options(*config))});
    *out = s.release();
  });
}

void mlpg_solution_destroy(mlpg_solution* s) { delete s; }

mlpg_status mlpg_solution_stats(const mlpg_solution* s, mlpg_solve_stats* out) {
  MLPG_REQUIRE(s && out, "null argument");
  const auto& st = s->result.stats;
  out->converged = st.converged ? 1 : 0;
  out->outer_iterations = st.outer_iterations;
  out->relative_residual = st.relative_residual;
  out->assembly_seconds = st.assembly_seconds;
  out->factorization_seconds = st.factorization_seconds;
  out->solve_seconds = st.sweep_seconds;
  return MLPG_OK;
}

size_t mlpg_solution_size(const mlpg_solution* s) {
  return s ? static_cast<size_t>(s->result.solution.coefficients().size()) : 0;
}

mlpg_status mlpg_solution_copy(const mlpg_solution* s, double* out, size_t count) {
  MLPG_REQUIRE(s && out, "null argument");
  const auto& c = s->result.solution.coefficients();
  MLPG_REQUIRE(count >= static_cast<size_t>(c.size()), "output buffer too small");
  std::memcpy(out, c.data(), sizeof(double) * static_cast<size_t>(c.size()));
  return MLPG_OK;
}

mlpg_status mlpg_solution_errors(const mlpg_problem* p, const mlpg_solution* s, double* err_L2h,
                                 double* err_H1h, double* err_L2_quad) {
  MLPG_REQUIRE(p && s, "null argument");
  return guarded([&] {
    const auto& vh = s->result.solution;
    double l2 = 0.0, h1 = 0.0;
    if (p->metric == mlpg::ErrorMetric::sampled) {
      const mlpg::SampledErrors e = mlpg::sampled_errors(p->problem, p->disc, vh);
      l2 = e.rel_L2h;
      h1 = e.rel_H1h;
    } else {
      const mlpg::MultilayerField ref = mlpg::reference_field(p->problem, p->disc);
      mlpg::MultilayerField err = ref;
      err.coefficients() -= vh.coefficients();
      l2 = mlpg::norm_L2h(err, p->disc) / mlpg::norm_L2h(ref, p->disc);
      h1 = mlpg::discrete_H1(err, p->disc, p->problem.variant) /
           mlpg::discrete_H1(ref, p->disc, p->problem.variant);
    }
    if (err_L2h) *err_L2h = l2;
    if (err_H1h) *err_H1h = h1;
    if (err_L2_quad) {
      *err_L2_quad = mlpg::quadrature_L2_error(p->problem, p->disc, vh) /
                     mlpg::quadrature_L2_norm(p->problem.exact, p->disc);
    }
  });
}

mlpg_status mlpg_solution_write_csv(const mlpg_problem* p, const mlpg_solution* s,
                                    const char* path) {
  MLPG_REQUIRE(p && s && path, "null argument");
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw mlpg::Error(mlpg::ErrorCode::io_error, std::string("cannot open ") + path);
    mlpg::write_field_csv(out, s->result.solution, p->disc);
    if (!out) throw mlpg::Error(mlpg::ErrorCode::io_error, std::string("write failed: ") + path);
  });
}

size_t mlpg_solution_stats_csv(const mlpg_solution* s, int header, char* buffer, size_t capacity) {
  if (!s) return copy_out("", buffer, capacity);
  std::string text;
  if (header) text = mlpg::stats_csv_header() + "\n";
  text += mlpg::stats_csv_row(s->result.stats) + "\n";
  return copy_out(text, buffer, capacity);
}

size_t mlpg_solution_stats_json(const mlpg_solution* s, char* buffer, size_t capacity) {
  return copy_out(s ? mlpg::stats_json(s->result.stats) : "", buffer, capacity);
}

mlpg_status mlpg_study_run(const mlpg_problem_config* problem, const int* layers,
                           const int* cells_per_side, size_t count,
                           const mlpg_solver_config* solver, mlpg_report** out) {
  MLPG_REQUIRE(problem && layers && cells_per_side && solver && out, "null argument");
  MLPG_REQUIRE(count > 0, "a study needs at least one resolution");
  *out = nullptr;
  return guarded([&] {
    mlpg::StudyOptions opts;
    for (size_t i = 0; i < count; ++i) opts.resolutions.push_back({layers[i], cells_per_side[i]});
    check_dim(problem->dim);
    opts.dim = problem->dim;
    opts.solver = solver_kind(solver->solver);
    opts.solver_options = solver_options(*solver);
    opts.assembly = assembly_options(*problem);
    opts.metric = metric_of(problem->error_metric);
    auto r = std::make_unique<mlpg_report>();
    r->report = mlpg::run_convergence_study(make_problem(*problem), opts);
    *out = r.release();
  });
}

void mlpg_report_destroy(mlpg_report* r) { delete r; }

size_t mlpg_report_row_count(const mlpg_report* r) { return r ? r->report.rows.size() : 0; }

mlpg_status mlpg_report_row(const mlpg_report* r, size_t i, mlpg_study_row* out) {
  MLPG_REQUIRE(r && out, "null argument");
  MLPG_REQUIRE(i < r->report.rows.size(), "row index out of range");
  const auto& row = r->report.rows[i];
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out->layers = row.layers;
  out->cells_per_side = row.cells_per_side;
  out->err_L2h = row.err_L2h;
  out->err_H1h = row.err_H1h;
  out->err_L2_quad = row.err_L2_quad;
  out->sampled_L2h = row.sampled_L2h;
  out->sampled_H1h = row.sampled_H1h;
  out->interp_L2h = row.interp_L2h;
  out->interp_H1h = row.interp_H1h;
  out->has_order = row.ord_L2 ? 1 : 0;
  out->ord_L2 = row.ord_L2.value_or(nan);
  out->ord_H1 = row.ord_H1.value_or(nan);
  out->outer_iterations = row.outer_iterations;
  out->converged = row.converged ? 1 : 0;
  out->assembly_seconds = row.assembly_seconds;
  out->solve_seconds = row.solve_seconds;
  return MLPG_OK;
}

int mlpg_report_all_converged(const mlpg_report* r) {
  return r && r->report.all_converged() ? 1 : 0;
}

size_t mlpg_report_warning_count(const mlpg_report* r) {
  return r ? r->report.warnings.size() : 0;
}

const char* mlpg_report_warning(const mlpg_report* r, size_t i) {
  return r && i < r->report.warnings.size() ? r->report.warnings[i].c_str() : nullptr;
}

size_t mlpg_report_csv(const mlpg_report* r, int with_timings, char* buffer, size_t capacity) {
  return copy_out(r ? r->report.csv(with_timings != 0) : "", buffer, capacity);
}

mlpg_status mlpg_stability_run(const mlpg_stability_config* c, mlpg_stability** out) {
  MLPG_REQUIRE(c && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    mlpg::StabilityOptions opts;
    opts.layers = c->layers;
    opts.cells_per_side = c->cells_per_side;
    opts.dim = c->dim;
    opts.samples = c->samples;
    opts.seed = c->seed;
    opts.infsup_layers = c->infsup_layers;
    opts.infsup_cells_per_side = c->infsup_cells_per_side;
    opts.slack = c->slack;
    auto s = std::make_unique<mlpg_stability>();
    s->report = mlpg::probe_stability(variant_of(c->variant), opts);
    *out = s.release();
  });
}

void mlpg_stability_destroy(mlpg_stability* s) { delete s; }

mlpg_status mlpg_stability_values_get(const mlpg_stability* s, mlpg_stability_values* out) {
  MLPG_REQUIRE(s && out, "null argument");
  const auto& r = s->report;
  out->equivalence_min = r.equivalence.min;
  out->equivalence_max = r.equivalence.max;
  out->equivalence_bound_min = r.equivalence_bound.min;
  out->equivalence_bound_max = r.equivalence_bound.max;
  out->coercivity_min = r.coercivity.min;
  out->coercivity_bound = r.coercivity_bound;
  out->continuity_max = std::max(std::abs(r.continuity.min), std::abs(r.continuity.max));
  out->continuity_bound = r.continuity_bound;
  out->has_inf_sup = r.inf_sup ? 1 : 0;
  out->inf_sup = r.inf_sup.value_or(std::numeric_limits<double>::quiet_NaN());
  out->inf_sup_bound = r.inf_sup_bound;
  out->equivalence_violations = r.equivalence_violations;
  out->coercivity_violations = r.coercivity_violations;
  out->continuity_violations = r.continuity_violations;
  out->passed = r.passed() ? 1 : 0;
  return MLPG_OK;
}

size_t mlpg_stability_text(const mlpg_stability* s, char* buffer, size_t capacity) {
  return copy_out(s ? s->report.text() : "", buffer, capacity);
}

}  // extern "C"
