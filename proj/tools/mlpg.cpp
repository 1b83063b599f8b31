// Command-line driver: solve, study and check subcommands over the C API.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlpg/mlpg.h"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_not_converged = 2;

struct RunConfig {
  std::string variant;
  int test = 0;
  int N = 10;
  int NH = 10;
  double L = 1.0;
  int d = 2;
  std::string solver = "gmres-jacobi";
  double tol = 1e-10;
  int max_outer = 20000;
  int restart = 50;
  int workers = 1;
  std::uint64_t seed = 20240611;
  int samples = 1000;
  std::string output;
  std::string resolutions = "10,20,40,80";
  double eps = 0.15;
  std::string rhs = "tensorized";
  std::string eta_check = "auto";
  std::string metric = "sampled";
  bool no_timings = false;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string error_text(mlpg_status s) {
  return std::string(mlpg_status_string(s)) + ": " + mlpg_last_error();
}

// Resolves --variant/--test into a model problem.
mlpg_problem_config problem_config(const RunConfig& rc, bool eps_given) {
  mlpg_problem_config pc;
  mlpg_problem_config_default(&pc);
  int test = rc.test;
  if (!rc.variant.empty()) {
    int implied = 0;
    if (rc.variant == "dirichlet-flat") implied = 1;
    else if (rc.variant == "nonflat") implied = 2;
    else if (rc.variant == "neumann") implied = 3;
    else throw ConfigError("unknown variant '" + rc.variant + "'");
    if (test != 0 && test != implied) {
      throw ConfigError("test " + std::to_string(test) + " does not use variant " + rc.variant);
    }
    if (implied == 2 && test == 0 && !eps_given) {
      throw ConfigError("variant nonflat needs surface parameters: give --eps or --test 2");
    }
    test = implied;
  }
  if (test == 0) test = 1;
  pc.test_id = test;
  pc.layers = rc.N;
  pc.cells_per_side = rc.NH;
  pc.dim = rc.d;
  pc.epsilon = rc.eps;
  if (rc.rhs == "tensorized") pc.rhs_mode = MLPG_RHS_TENSORIZED;
  else if (rc.rhs == "layer-averaged") pc.rhs_mode = MLPG_RHS_LAYER_AVERAGED;
  else throw ConfigError("unknown rhs mode '" + rc.rhs + "'");
  if (rc.eta_check == "strict") pc.strict_eta = 1;
  else if (rc.eta_check == "warn") pc.strict_eta = 0;
  else if (rc.eta_check == "auto") pc.strict_eta = -1;
  else throw ConfigError("unknown eta check '" + rc.eta_check + "'");
  if (rc.metric == "sampled") pc.error_metric = MLPG_METRIC_SAMPLED;
  else if (rc.metric == "interpolant") pc.error_metric = MLPG_METRIC_INTERPOLANT;
  else throw ConfigError("unknown error metric '" + rc.metric + "'");
  if (rc.L != 1.0) throw ConfigError("the model problems are posed with L = 1");
  return pc;
}

mlpg_solver_config solver_config(const RunConfig& rc) {
  mlpg_solver_config sc;
  mlpg_solver_config_default(&sc);
  if (rc.solver == "jacobi") sc.solver = MLPG_SOLVER_JACOBI;
  else if (rc.solver == "gmres-jacobi") sc.solver = MLPG_SOLVER_GMRES_JACOBI;
  else if (rc.solver == "monolithic") sc.solver = MLPG_SOLVER_MONOLITHIC;
  else throw ConfigError("unknown solver '" + rc.solver + "'");
  if (!(rc.tol > 0.0)) throw ConfigError("--tol must be positive");
  if (rc.workers < 1) throw ConfigError("--workers must be >= 1");
  sc.tol = rc.tol;
  sc.max_outer = rc.max_outer;
  sc.restart = rc.restart;
  sc.workers = rc.workers;
  return sc;
}

// "10,20,40" or "10:20,20:40" (N:NH).
void parse_resolutions(const std::string& text, std::vector<int>& layers, std::vector<int>& cells) {
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const auto colon = tok.find(':');
    try {
      if (colon == std::string::npos) {
        layers.push_back(std::stoi(tok));
        cells.push_back(layers.back());
      } else {
        layers.push_back(std::stoi(tok.substr(0, colon)));
        cells.push_back(std::stoi(tok.substr(colon + 1)));
      }
    } catch (const std::exception&) {
      throw ConfigError("bad resolution '" + tok + "'");
    }
  }
  if (layers.empty()) throw ConfigError("--resolutions is empty");
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out || !(out << text)) throw ConfigError("cannot write " + path);
}

template <class F>
std::string read_text(F&& fill) {
  const size_t n = fill(nullptr, 0);
  std::string s(n + 1, '\0');
  fill(s.data(), s.size());
  s.resize(n);
  return s;
}

int cmd_solve(const RunConfig& rc, bool eps_given) {
  const mlpg_problem_config pc = problem_config(rc, eps_given);
  const mlpg_solver_config sc = solver_config(rc);
  mlpg_problem* problem = nullptr;
  if (mlpg_status s = mlpg_problem_create(&pc, &problem); s != MLPG_OK) {
    std::cerr << "error: " << error_text(s) << '\n';
    return exit_config;
  }
  for (size_t i = 0; i < mlpg_problem_warning_count(problem); ++i) {
    std::cerr << "warning: " << mlpg_problem_warning(problem, i) << '\n';
  }
  mlpg_solution* solution = nullptr;
  if (mlpg_status s = mlpg_solve(problem, &sc, &solution); s != MLPG_OK) {
    std::cerr << "error: " << error_text(s) << '\n';
    mlpg_problem_destroy(problem);
    return exit_config;
  }
  mlpg_solve_stats stats{};
  mlpg_solution_stats(solution, &stats);
  double e0 = 0, e1 = 0, eq = 0;
  mlpg_solution_errors(problem, solution, &e0, &e1, &eq);

  int code = stats.converged ? exit_ok : exit_not_converged;
  if (!rc.output.empty()) {
    if (mlpg_status s = mlpg_solution_write_csv(problem, solution, rc.output.c_str());
        s != MLPG_OK) {
      std::cerr << "error: " << error_text(s) << '\n';
      code = exit_config;
    }
  }
  std::cout << read_text([&](char* b, size_t n) { return mlpg_solution_stats_csv(solution, 1, b, n); });
  std::printf("err_L2h,err_H1h,err_L2_quad\n%.9g,%.9g,%.9g\n", e0, e1, eq);
  if (!stats.converged) std::cerr << "warning: solver did not reach the tolerance\n";
  mlpg_solution_destroy(solution);
  mlpg_problem_destroy(problem);
  return code;
}

int cmd_study(const RunConfig& rc, bool eps_given) {
  const mlpg_problem_config pc = problem_config(rc, eps_given);
  const mlpg_solver_config sc = solver_config(rc);
  std::vector<int> layers, cells;
  parse_resolutions(rc.resolutions, layers, cells);
  mlpg_report* report = nullptr;
  if (mlpg_status s = mlpg_study_run(&pc, layers.data(), cells.data(), layers.size(), &sc, &report);
      s != MLPG_OK) {
    std::cerr << "error: " << error_text(s) << '\n';
    return exit_config;
  }
  for (size_t i = 0; i < mlpg_report_warning_count(report); ++i) {
    std::cerr << "warning: " << mlpg_report_warning(report, i) << '\n';
  }
  const int timings = rc.no_timings ? 0 : 1;
  emit(read_text([&](char* b, size_t n) { return mlpg_report_csv(report, timings, b, n); }),
       rc.output);
  const int code = mlpg_report_all_converged(report) ? exit_ok : exit_not_converged;
  if (code != exit_ok) std::cerr << "warning: at least one solve did not reach the tolerance\n";
  mlpg_report_destroy(report);
  return code;
}

int cmd_check(const RunConfig& rc, bool n_given, bool nh_given) {
  mlpg_stability_config cfg;
  mlpg_stability_config_default(&cfg);
  const std::string v = rc.variant.empty() ? "dirichlet-flat" : rc.variant;
  if (v == "dirichlet-flat") cfg.variant = MLPG_DIRICHLET_FLAT;
  else if (v == "nonflat") cfg.variant = MLPG_NONFLAT;
  else if (v == "neumann") cfg.variant = MLPG_NEUMANN;
  else throw ConfigError("unknown variant '" + v + "'");
  if (n_given) cfg.layers = rc.N;
  if (nh_given) cfg.cells_per_side = rc.NH;
  cfg.dim = rc.d;
  cfg.samples = rc.samples;
  cfg.seed = rc.seed;
  mlpg_stability* st = nullptr;
  if (mlpg_status s = mlpg_stability_run(&cfg, &st); s != MLPG_OK) {
    std::cerr << "error: " << error_text(s) << '\n';
    return exit_config;
  }
  emit(read_text([&](char* b, size_t n) { return mlpg_stability_text(st, b, n); }), rc.output);
  mlpg_stability_values vals{};
  mlpg_stability_values_get(st, &vals);
  mlpg_stability_destroy(st);
  return vals.passed ? exit_ok : exit_not_converged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilayer Petrov-Galerkin elliptic solver"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file; flags override it");

  RunConfig rc;
  app.add_option("--variant", rc.variant, "dirichlet-flat | nonflat | neumann");
  app.add_option("--test", rc.test, "model problem 1, 2 or 3")->check(CLI::Range(1, 3));
  auto* n_opt = app.add_option("--N", rc.N, "number of layers");
  auto* nh_opt = app.add_option("--NH", rc.NH, "horizontal cells per side");
  app.add_option("--L", rc.L, "domain height");
  app.add_option("--d", rc.d, "horizontal dimension");
  app.add_option("--solver", rc.solver, "jacobi | gmres-jacobi | monolithic");
  app.add_option("--tol", rc.tol, "relative residual tolerance");
  app.add_option("--max-outer", rc.max_outer, "maximum outer iterations");
  app.add_option("--restart", rc.restart, "GMRES restart length");
  app.add_option("--workers", rc.workers, "worker threads")->envname("MLPG_WORKERS");
  app.add_option("--seed", rc.seed, "random seed for stability probes");
  app.add_option("--samples", rc.samples, "random samples for stability probes");
  app.add_option("--output", rc.output, "output path (stdout if empty)");
  app.add_option("--resolutions", rc.resolutions, "study resolutions, e.g. 10,20,40 or 10:20");
  auto* eps = app.add_option("--eps", rc.eps, "surface amplitude of the non-flat problem");
  app.add_option("--rhs", rc.rhs, "tensorized | layer-averaged");
  app.add_option("--eta-check", rc.eta_check, "auto | strict | warn");
  app.add_option("--metric", rc.metric, "sampled | interpolant");
  app.add_flag("--no-timings", rc.no_timings, "leave timing columns empty");

  auto* solve = app.add_subcommand("solve", "solve one model problem")->fallthrough();
  auto* study = app.add_subcommand("study", "convergence study")->fallthrough();
  auto* check = app.add_subcommand("check", "stability constants")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    const bool eps_given = eps->count() > 0;
    if (*solve) return cmd_solve(rc, eps_given);
    if (*study) return cmd_study(rc, eps_given);
    if (*check) return cmd_check(rc, n_opt->count() > 0, nh_opt->count() > 0);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  }
  return exit_config;
}
