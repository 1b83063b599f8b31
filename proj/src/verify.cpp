#include "mlpg/verify.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "mlpg/error.hpp"

namespace mlpg {

namespace {

constexpr double pi = std::numbers::pi;

// P(x, y) = x^2 (1-x) y (1-y)^2 = X(x) Y(y) and its derivatives.
struct Poly {
  double p, px, py, pxx, pyy;
};

Poly poly(double x, double y) {
  const double X = x * x * (1.0 - x), Xd = 2.0 * x - 3.0 * x * x, Xdd = 2.0 - 6.0 * x;
  const double Y = y * (1.0 - y) * (1.0 - y), Yd = 1.0 - 4.0 * y + 3.0 * y * y,
               Ydd = -4.0 + 6.0 * y;
  return {X * Y, Xd * Y, X * Yd, Xdd * Y, X * Ydd};
}

struct Eta {
  double e, ex, ey, exx, eyy;
};

Eta eta_at(double x, double y, double eps) {
  const double arg = 2.0 * pi * (x + y);
  const double d1 = 2.0 * pi * eps * std::cos(arg);
  const double d2 = -4.0 * pi * pi * eps * std::sin(arg);
  return {1.0 + eps * std::sin(arg), d1, d1, d2, d2};
}

}  // namespace

double nonflat_physical_solution(double x, double y, double z, double epsilon) {
  const double e = eta_at(x, y, epsilon).e;
  return 64.0 * std::sin(pi * z / e) * poly(x, y).p;
}

double nonflat_physical_source(double x, double y, double z, double epsilon) {
  const Eta et = eta_at(x, y, epsilon);
  const Poly P = poly(x, y);
  const double e2 = et.e * et.e, e3 = e2 * et.e;
  const double s = pi * z / et.e;
  const double sx = -pi * z * et.ex / e2;
  const double sy = -pi * z * et.ey / e2;
  const double sxx = -pi * z * (et.exx / e2 - 2.0 * et.ex * et.ex / e3);
  const double syy = -pi * z * (et.eyy / e2 - 2.0 * et.ey * et.ey / e3);
  const double lap =
      64.0 * (std::sin(s) * (P.pxx + P.pyy - P.p * (sx * sx + sy * sy) - P.p * pi * pi / e2) +
              std::cos(s) * (P.p * (sxx + syy) + 2.0 * (sx * P.px + sy * P.py)));
  return -lap;
}

ManufacturedProblem manufactured(int test_id, double epsilon) {
  ManufacturedProblem mp;
  mp.test_id = test_id;
  mp.height = 1.0;
  switch (test_id) {
    case 1:
      mp.name = "test1";
      mp.variant = Variant::dirichlet_flat;
      mp.exact = [](double x, double y, double z) {
        return 4.0 * z * z * (1.0 - z) * std::sin(pi * x * x) * std::sin(pi * y);
      };
      mp.source = [](double x, double y, double z) {
        const double sx = std::sin(pi * x * x), sy = std::sin(pi * y);
        const double vz = 4.0 * z * z * (1.0 - z);
        const double dxx = 2.0 * pi * std::cos(pi * x * x) - 4.0 * pi * pi * x * x * sx;
        const double lap = vz * (dxx * sy - pi * pi * sx * sy) + (8.0 - 24.0 * z) * sx * sy;
        return -lap;
      };
      return mp;
    case 2: {
      mp.name = "test2";
      mp.variant = Variant::nonflat;
      mp.epsilon = epsilon;
      // ||grad eta||_inf = 2 sqrt(2) pi eps, above one for the default 0.15.
      mp.eta_check = 2.0 * std::sqrt(2.0) * pi * epsilon < 1.0 ? EtaCheck::strict : EtaCheck::warn;
      mp.exact = [](double x, double y, double z) {
        return 64.0 * std::sin(pi * z) * poly(x, y).p;
      };
      mp.source = [epsilon](double x, double y, double z) {
        const double e = eta_at(x, y, epsilon).e;
        return e * nonflat_physical_source(x, y, z * e, epsilon);
      };
      mp.surface.eta = [epsilon](const HorizontalPoint& p) { return eta_at(p.x, p.y, epsilon).e; };
      mp.surface.grad_eta = [epsilon](const HorizontalPoint& p) {
        const Eta et = eta_at(p.x, p.y, epsilon);
        return std::array<double, 2>{et.ex, et.ey};
      };
      return mp;
    }
    case 3: {
      mp.name = "test3";
      mp.variant = Variant::neumann;
      const double L = mp.height;
      mp.exact = [](double x, double y, double z) {
        return 64.0 * std::sin(pi * z / 2.0) * poly(x, y).p;
      };
      mp.source = [](double x, double y, double z) {
        const Poly P = poly(x, y);
        return 64.0 * std::sin(pi * z / 2.0) * (pi * pi / 4.0 * P.p - P.pxx - P.pyy);
      };
      mp.flux = [L](const HorizontalPoint& p) {
        return 32.0 * pi * std::cos(pi * L / 2.0) * poly(p.x, p.y).p;
      };
      return mp;
    }
    default:
      throw Error(ErrorCode::unknown_test_id,
                  "test id " + std::to_string(test_id) + " is not one of 1, 2, 3");
  }
}

ManufacturedProblem manufactured_neumann_flux(int dim) {
  ManufacturedProblem mp;
  mp.test_id = 0;
  mp.name = "neumann-flux";
  mp.variant = Variant::neumann;
  mp.height = 1.0;
  const bool two = dim == 2;
  auto shape = [two](double x, double y) {
    return two ? std::sin(pi * x) * std::sin(pi * y) : std::sin(pi * x);
  };
  const double lam = (two ? 2.0 : 1.0) * pi * pi + pi * pi / 9.0;
  mp.exact = [shape](double x, double y, double z) { return std::sin(pi * z / 3.0) * shape(x, y); };
  mp.source = [shape, lam](double x, double y, double z) {
    return lam * std::sin(pi * z / 3.0) * shape(x, y);
  };
  mp.flux = [shape](const HorizontalPoint& p) { return pi / 6.0 * shape(p.x, p.y); };
  return mp;
}

BlockTridiagonalSystem assemble_problem(const ManufacturedProblem& problem,
                                        const Discretization& disc,
                                        const AssemblyOptions& options) {
  switch (problem.variant) {
    case Variant::dirichlet_flat:
      return assemble_dirichlet_flat(disc.mesh, disc.dofs, disc.grid, problem.source, options);
    case Variant::nonflat: {
      AssemblyOptions opts = options;
      if (problem.eta_check == EtaCheck::warn) opts.eta_check = EtaCheck::warn;
      return assemble_nonflat(disc.mesh, disc.dofs, disc.grid, problem.surface, problem.source,
                              opts);
    }
    case Variant::neumann:
      return assemble_neumann(disc.mesh, disc.dofs, disc.grid, problem.source,
                              problem.flux ? problem.flux : constant_field(0.0), options);
  }
  throw Error(ErrorCode::invalid_argument, "unknown variant");
}

MultilayerField reference_field(const ManufacturedProblem& problem, const Discretization& disc) {
  MultilayerField ref = interpolate_Pih(problem.exact, disc);
  if (problem.variant == Variant::neumann && problem.flux) {
    // The unknown stands for v - g_h; g_h averages to -(h/2) g_k on the top layer.
    const double half = 0.5 * disc.grid.thickness;
    auto top = ref.layer(disc.layers());
    for (std::size_t i = 0; i < disc.ndof(); ++i) {
      const auto& p = disc.mesh.vertices[disc.dofs.dof_to_vertex[i]];
      top[static_cast<Eigen::Index>(i)] += half * problem.flux({p[0], p[1], 0});
    }
  }
  return ref;
}

namespace {

// Visits (x, y, z, weight, cell geometry, barycentric, layer) over the column
// with the horizontal rule times 3-point Gauss on each half layer.
template <class Visit>
void column_quadrature(const Discretization& disc, Visit&& visit) {
  const QuadratureRule& hrule = horizontal_rule(disc.mesh.dim);
  const QuadratureRule& zrule = gauss_segment(3);
  const LayerGrid& grid = disc.grid;
  for (std::size_t c = 0; c < disc.mesh.num_cells(); ++c) {
    const CellGeometry g = cell_geometry(disc.mesh, c);
    for (std::size_t q = 0; q < hrule.size(); ++q) {
      const auto& lam = hrule.barycentric[q];
      const HorizontalPoint pt = g.map(lam, c);
      const double wh = hrule.weights[q] * g.measure;
      for (int a = 1; a <= grid.layers; ++a) {
        const double cuts[3] = {grid.interfaces[a - 1], grid.midpoints[a - 1], grid.interfaces[a]};
        for (int half = 0; half < 2; ++half) {
          const double lo = cuts[half], len = cuts[half + 1] - cuts[half];
          for (std::size_t r = 0; r < zrule.size(); ++r) {
            const double z = lo + zrule.barycentric[r][1] * len;
            visit(pt, z, wh * zrule.weights[r] * len, g, lam, a);
          }
        }
      }
    }
  }
}

}  // namespace

double quadrature_L2_error(const ManufacturedProblem& problem, const Discretization& disc,
                           const MultilayerField& vh) {
  const bool lifted = problem.variant == Variant::neumann && problem.flux;
  const std::vector<double> g_nodal =
      lifted ? nodal_values(disc.mesh, problem.flux) : std::vector<double>();
  const int n = disc.layers();
  const double zs = disc.grid.top();
  double s = 0.0;
  column_quadrature(disc, [&](const HorizontalPoint& pt, double z, double w, const CellGeometry& g,
                              const std::array<double, 3>& lam, int a) {
    double val = 0.0;
    for (int k = 0; k < g.nverts; ++k) {
      const int dof = disc.dofs.vertex_to_dof[g.vertices[k]];
      if (dof >= 0) val += lam[k] * vh.layer(a)[dof];
      if (lifted && a == n) val += lam[k] * g_nodal[g.vertices[k]] * (z - zs);
    }
    const double e = problem.exact(pt.x, pt.y, z) - val;
    s += w * e * e;
  });
  return std::sqrt(s);
}

double quadrature_L2_norm(const SpaceField& v, const Discretization& disc) {
  double s = 0.0;
  column_quadrature(disc, [&](const HorizontalPoint& pt, double z, double w, const CellGeometry&,
                              const std::array<double, 3>&, int) {
    const double e = v(pt.x, pt.y, z);
    s += w * e * e;
  });
  return std::sqrt(s);
}

SampledErrors sampled_errors(const ManufacturedProblem& problem, const Discretization& disc,
                             const MultilayerField& vh) {
  const int n = disc.layers();
  const double h = disc.grid.thickness;
  const bool lifted = problem.variant == Variant::neumann && problem.flux;
  const std::vector<double> g_nodal =
      lifted ? nodal_values(disc.mesh, problem.flux) : std::vector<double>();
  // Central differences for the horizontal gradient of the exact solution.
  const double step = 1e-6;
  const QuadratureRule& rule = horizontal_rule(disc.mesh.dim);
  const bool two = disc.mesh.dim == 2;

  // Per layer: squared L2 and gradient norms; per interface: squared jumps.
  // Index 0 of the jump arrays is the bottom, index n the top.
  std::vector<double> e_l2(n), r_l2(n), e_gr(n), r_gr(n), e_jump(n + 1), r_jump(n + 1);
  std::vector<double> e(n), r(n);
  for (std::size_t c = 0; c < disc.mesh.num_cells(); ++c) {
    const CellGeometry g = cell_geometry(disc.mesh, c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.barycentric[q];
      const HorizontalPoint pt = g.map(lam, c);
      const double w = rule.weights[q] * g.measure;
      for (int a = 1; a <= n; ++a) {
        const double z = disc.grid.midpoints[a - 1];
        double val = 0.0, gx = 0.0, gy = 0.0;
        for (int k = 0; k < g.nverts; ++k) {
          double coef = 0.0;
          const int dof = disc.dofs.vertex_to_dof[g.vertices[k]];
          if (dof >= 0) coef = vh.layer(a)[dof];
          if (lifted && a == n) coef -= 0.5 * h * g_nodal[g.vertices[k]];
          val += lam[k] * coef;
          gx += coef * g.grads[k][0];
          gy += coef * g.grads[k][1];
        }
        const double rv = problem.exact(pt.x, pt.y, z);
        const double rx =
            (problem.exact(pt.x + step, pt.y, z) - problem.exact(pt.x - step, pt.y, z)) /
            (2.0 * step);
        const double ry =
            two ? (problem.exact(pt.x, pt.y + step, z) - problem.exact(pt.x, pt.y - step, z)) /
                      (2.0 * step)
                : 0.0;
        r[a - 1] = rv;
        e[a - 1] = rv - val;
        e_l2[a - 1] += w * e[a - 1] * e[a - 1];
        r_l2[a - 1] += w * rv * rv;
        e_gr[a - 1] += w * ((rx - gx) * (rx - gx) + (ry - gy) * (ry - gy));
        r_gr[a - 1] += w * (rx * rx + ry * ry);
      }
      e_jump[0] += w * e[0] * e[0];
      r_jump[0] += w * r[0] * r[0];
      for (int a = 1; a < n; ++a) {
        e_jump[a] += w * (e[a] - e[a - 1]) * (e[a] - e[a - 1]);
        r_jump[a] += w * (r[a] - r[a - 1]) * (r[a] - r[a - 1]);
      }
      e_jump[n] += w * e[n - 1] * e[n - 1];
      r_jump[n] += w * r[n - 1] * r[n - 1];
    }
  }
  auto h1 = [&](const std::vector<double>& gr, const std::vector<double>& jump) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += h * gr[a];
    s += (2.0 / h) * jump[0];
    if (problem.variant == Variant::neumann) {
      for (int a = 1; a <= n - 2; ++a) s += jump[a] / h;
      s += jump[n - 1] / (1.5 * h);
    } else {
      for (int a = 1; a < n; ++a) s += jump[a] / h;
      s += (2.0 / h) * jump[n];
    }
    return std::sqrt(s);
  };
  auto l2 = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += h * x;
    return std::sqrt(s);
  };
  return {l2(e_l2) / l2(r_l2), h1(e_gr, e_jump) / h1(r_gr, r_jump)};
}

double discrete_H1(const MultilayerField& v, const Discretization& disc, Variant variant) {
  return variant == Variant::neumann ? norm_Xh_bl(v, disc) : norm_Xh(v, disc);
}

double convergence_order(double coarse, double fine) { return std::log2(coarse / fine); }

bool ConvergenceReport::all_converged() const {
  for (const auto& r : rows) {
    if (!r.converged) return false;
  }
  return true;
}

std::string ConvergenceReport::csv(bool with_timings) const {
  std::ostringstream out;
  out << "variant,N,NH,err_L2h,err_H1h,ord_L2,ord_H1,outer_iters,assembly_s,solve_s\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out << to_string(variant) << ',' << r.layers << ',' << r.cells_per_side << ','
        << num(r.err_L2h) << ',' << num(r.err_H1h) << ','
        << (r.ord_L2 ? num(*r.ord_L2) : "") << ',' << (r.ord_H1 ? num(*r.ord_H1) : "") << ','
        << r.outer_iterations << ',' << (with_timings ? num(r.assembly_seconds) : "") << ','
        << (with_timings ? num(r.solve_seconds) : "") << '\n';
  }
  return out.str();
}

ConvergenceReport run_convergence_study(const ManufacturedProblem& problem,
                                        const StudyOptions& options) {
  if (options.resolutions.empty()) {
    throw Error(ErrorCode::invalid_argument, "a study needs at least one resolution");
  }
  ConvergenceReport report;
  report.variant = problem.variant;
  report.test_id = problem.test_id;
  for (const Resolution& res : options.resolutions) {
    const Discretization disc =
        make_discretization(problem.height, res.layers, options.dim, res.cells_per_side);
    const BlockTridiagonalSystem system = assemble_problem(problem, disc, options.assembly);
    for (const auto& w : system.warnings) {
      if (report.warnings.empty() || report.warnings.back() != w) report.warnings.push_back(w);
    }
    const SolveResult result = solve(system, options.solver, options.solver_options);
    const MultilayerField ref = reference_field(problem, disc);
    MultilayerField err = ref;
    err.coefficients() -= result.solution.coefficients();

    StudyRow row;
    row.layers = res.layers;
    row.cells_per_side = res.cells_per_side;
    row.interp_L2h = norm_L2h(err, disc) / norm_L2h(ref, disc);
    row.interp_H1h =
        discrete_H1(err, disc, problem.variant) / discrete_H1(ref, disc, problem.variant);
    const SampledErrors sampled = sampled_errors(problem, disc, result.solution);
    row.sampled_L2h = sampled.rel_L2h;
    row.sampled_H1h = sampled.rel_H1h;
    const bool use_sampled = options.metric == ErrorMetric::sampled;
    row.err_L2h = use_sampled ? row.sampled_L2h : row.interp_L2h;
    row.err_H1h = use_sampled ? row.sampled_H1h : row.interp_H1h;
    row.err_L2_quad = quadrature_L2_error(problem, disc, result.solution) /
                      quadrature_L2_norm(problem.exact, disc);
    row.outer_iterations = result.stats.outer_iterations;
    row.converged = result.stats.converged;
    row.relative_residual = result.stats.relative_residual;
    row.assembly_seconds = system.assembly_seconds;
    row.solve_seconds = result.stats.factorization_seconds + result.stats.sweep_seconds;
    if (!report.rows.empty()) {
      const StudyRow& prev = report.rows.back();
      row.ord_L2 = convergence_order(prev.err_L2h, row.err_L2h);
      row.ord_H1 = convergence_order(prev.err_H1h, row.err_H1h);
    }
    report.rows.push_back(row);
  }
  return report;
}

double exact_inf_sup(const Discretization& disc, Variant variant, const Surface& surface) {
  const SpaceField zero = [](double, double, double) { return 0.0; };
  BlockTridiagonalSystem sys;
  switch (variant) {
    case Variant::dirichlet_flat:
      sys = assemble_dirichlet_flat(disc.mesh, disc.dofs, disc.grid, zero);
      break;
    case Variant::nonflat: {
      AssemblyOptions opts;
      opts.eta_check = EtaCheck::warn;
      sys = assemble_nonflat(disc.mesh, disc.dofs, disc.grid, surface, zero, opts);
      break;
    }
    case Variant::neumann:
      sys = assemble_neumann(disc.mesh, disc.dofs, disc.grid, zero, constant_field(0.0));
      break;
  }
  const Layout layout = layout_of(variant);
  const Eigen::MatrixXd B = Eigen::MatrixXd(sys.global_matrix());
  const Eigen::LLT<Eigen::MatrixXd> gx(Eigen::MatrixXd(gram_Xh(disc, layout)));
  const Eigen::LLT<Eigen::MatrixXd> gy(Eigen::MatrixXd(gram_H1_test(disc, layout)));
  if (gx.info() != Eigen::Success || gy.info() != Eigen::Success) {
    throw Error(ErrorCode::singular_matrix, "Gram matrix is not positive definite");
  }
  // T = L_Y^{-1} B L_X^{-T}
  const Eigen::MatrixXd left = gy.matrixL().solve(B);
  const Eigen::MatrixXd t = gx.matrixL().solve(left.transpose()).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(t);
  return svd.singularValues().minCoeff();
}

bool StabilityReport::passed(double infsup_slack) const {
  if (equivalence_violations || coercivity_violations || continuity_violations) return false;
  if (inf_sup && !std::isnan(inf_sup_bound) && *inf_sup < inf_sup_bound - infsup_slack) {
    return false;
  }
  return true;
}

std::string StabilityReport::text() const {
  std::ostringstream out;
  char buf[256];
#define LINE(...)                               \
  do {                                          \
    std::snprintf(buf, sizeof buf, __VA_ARGS__); \
    out << buf << '\n';                         \
  } while (0)
  LINE("variant %s samples %d seed %llu", to_string(variant), samples,
       static_cast<unsigned long long>(seed));
  LINE("equivalence  min %.9g max %.9g bound [%.9g, %.9g] violations %d", equivalence.min,
       equivalence.max, equivalence_bound.min, equivalence_bound.max, equivalence_violations);
  LINE("coercivity   min %.9g max %.9g bound >= %.9g violations %d", coercivity.min,
       coercivity.max, coercivity_bound, coercivity_violations);
  LINE("continuity   min %.9g max %.9g bound <= %.9g violations %d", continuity.min,
       continuity.max, continuity_bound, continuity_violations);
  if (inf_sup) {
    LINE("inf-sup      %.9g bound >= %.9g", *inf_sup, inf_sup_bound);
  } else {
    LINE("inf-sup      skipped");
  }
  LINE("result %s", passed() ? "pass" : "fail");
#undef LINE
  return out.str();
}

StabilityReport probe_stability(Variant variant, const StabilityOptions& options) {
  if (options.samples < 1) throw Error(ErrorCode::invalid_argument, "samples must be >= 1");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  StabilityReport rep;
  rep.variant = variant;
  rep.samples = options.samples;
  rep.seed = options.seed;
  const Layout layout = layout_of(variant);
  const bool neumann = variant == Variant::neumann;
  rep.equivalence_bound = neumann ? Range{0.8, 4.0} : Range{1.0, std::sqrt(3.0)};
  rep.coercivity_bound = variant == Variant::dirichlet_flat ? 0.5 : nan;
  rep.continuity_bound = variant == Variant::dirichlet_flat ? std::sqrt(3.0) : nan;
  rep.inf_sup_bound = variant == Variant::dirichlet_flat ? 0.5 : neumann ? 0.4 : nan;

  FormData form;
  form.variant = variant;
  if (variant == Variant::nonflat) form.surface = manufactured(2, 0.10).surface;

  const Discretization disc =
      make_discretization(1.0, options.layers, options.dim, options.cells_per_side);
  auto norm = [&](const MultilayerField& v) {
    return neumann ? norm_Xh_bl(v, disc) : norm_Xh(v, disc);
  };
  std::mt19937_64 rng(options.seed);
  const double inf = std::numeric_limits<double>::infinity();
  rep.equivalence = {inf, -inf};
  rep.coercivity = {inf, -inf};
  rep.continuity = {inf, -inf};
  auto track = [](Range& r, double v) {
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  };
  const double slack = options.slack;
  for (int s = 0; s < options.samples; ++s) {
    const MultilayerField v = random_field(disc.layers(), disc.ndof(), Space::trial, rng);
    const MultilayerField phi =
        random_field(disc.layers(), disc.ndof(), test_space(layout), rng);
    const MultilayerField tv = lift_Th(v, layout);
    const double nv = norm(v);
    const double eq = nv / seminorm_H1_test(tv, disc);
    const double co = eval_bilinear(v, tv, disc, form) / (nv * nv);
    const double ct = eval_bilinear(v, phi, disc, form) / (nv * seminorm_H1_test(phi, disc));
    track(rep.equivalence, eq);
    track(rep.coercivity, co);
    track(rep.continuity, ct);
    if (!rep.equivalence_bound.contains(eq, slack)) ++rep.equivalence_violations;
    if (!std::isnan(rep.coercivity_bound) && co < rep.coercivity_bound - slack) {
      ++rep.coercivity_violations;
    }
    if (!std::isnan(rep.continuity_bound) && std::abs(ct) > rep.continuity_bound + slack) {
      ++rep.continuity_violations;
    }
  }

  const Discretization small = make_discretization(1.0, options.infsup_layers, options.dim,
                                                   options.infsup_cells_per_side);
  if (static_cast<std::size_t>(small.layers()) * small.ndof() <= 100) {
    rep.inf_sup = exact_inf_sup(small, variant, form.surface);
  }
  return rep;
}

}  // namespace mlpg
