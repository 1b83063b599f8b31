#include "mlpg/fields.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mlpg/error.hpp"

namespace mlpg {

const char* to_string(Space s) noexcept {
  switch (s) {
    case Space::trial:
      return "X_h";
    case Space::test:
      return "Y_h";
    case Space::test_neumann:
      return "Yhat_h";
  }
  return "?";
}

Discretization make_discretization(double height, int layers, int dim, int cells_per_side) {
  Discretization disc;
  disc.grid = build_layer_grid(height, layers);
  auto sm = build_structured_mesh(dim, cells_per_side);
  disc.mesh = std::move(sm.mesh);
  disc.dofs = std::move(sm.dofs);
  disc.stiffness = assemble_weighted_stiffness(disc.mesh, disc.dofs, constant_field(1.0));
  disc.mass = assemble_weighted_mass(disc.mesh, disc.dofs, constant_field(1.0));
  return disc;
}

MultilayerField::MultilayerField(int layers, std::size_t ndof, Space space)
    : layers_(layers),
      ndof_(ndof),
      space_(space),
      coeffs_(Vector::Zero(static_cast<Eigen::Index>(layers) * static_cast<Eigen::Index>(ndof))) {}

MultilayerField::MultilayerField(int layers, std::size_t ndof, Space space, Vector coefficients)
    : layers_(layers), ndof_(ndof), space_(space), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != static_cast<Eigen::Index>(layers) * static_cast<Eigen::Index>(ndof)) {
    throw Error(ErrorCode::invalid_argument, "coefficient vector does not have N x ndof entries");
  }
}

namespace {

void require_space(const MultilayerField& f, Space expected, const char* what) {
  if (f.space() != expected) {
    throw Error(ErrorCode::wrong_space_tag, std::string(what) + " expects a " +
                                                to_string(expected) + " field, got " +
                                                to_string(f.space()));
  }
}

void require_shape(const MultilayerField& f, const Discretization& disc) {
  if (f.layers() != disc.layers() || f.ndof() != disc.ndof()) {
    throw Error(ErrorCode::invalid_argument, "field shape does not match the discretization");
  }
}

double quad(const SparseMatrix& m, const Eigen::Ref<const Vector>& a,
            const Eigen::Ref<const Vector>& b) {
  return a.dot(m * b);
}

SparseMatrix block_tridiagonal(int n, const std::function<SparseMatrix(int, int)>& block,
                               std::size_t ndof) {
  const auto nd = static_cast<int>(ndof);
  std::vector<Eigen::Triplet<double, int>> triplets;
  for (int a = 1; a <= n; ++a) {
    for (int b = std::max(1, a - 1); b <= std::min(n, a + 1); ++b) {
      const SparseMatrix blk = block(a, b);
      for (int r = 0; r < blk.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(blk, r); it; ++it) {
          triplets.emplace_back((a - 1) * nd + r, (b - 1) * nd + it.col(), it.value());
        }
      }
    }
  }
  SparseMatrix m(n * nd, n * nd);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

MultilayerField lift_Th(const MultilayerField& v, Layout layout) {
  require_space(v, Space::trial, "lift_Th");
  return MultilayerField(v.layers(), v.ndof(), test_space(layout), v.coefficients());
}

MultilayerField interpolate_Pih(const SpaceField& v, const Discretization& disc) {
  const LayerGrid& grid = disc.grid;
  const int n = grid.layers;
  const double h = grid.thickness;
  const std::vector<double> knots = grid.dirichlet_knots();
  MultilayerField out(n, disc.ndof(), Space::trial);
  std::vector<double> values(knots.size());
  for (std::size_t i = 0; i < disc.ndof(); ++i) {
    const auto& p = disc.mesh.vertices[disc.dofs.dof_to_vertex[i]];
    for (std::size_t j = 0; j < knots.size(); ++j) values[j] = v(p[0], p[1], knots[j]);
    // Interpolant at z, for z in [knots[j], knots[j+1]].
    auto interp = [&](std::size_t j, double z) {
      const double t = (z - knots[j]) / (knots[j + 1] - knots[j]);
      return (1.0 - t) * values[j] + t * values[j + 1];
    };
    for (int a = 1; a <= n; ++a) {
      // Layer a = [z_{a-1/2}, z_{a+1/2}] is cut by the knot z_a = knots[a].
      const double lo = grid.interfaces[a - 1];
      const double hi = grid.interfaces[a];
      const double mid = knots[a];
      const double left = 0.5 * (interp(a - 1, lo) + values[a]) * (mid - lo);
      const double right = 0.5 * (values[a] + interp(a, hi)) * (hi - mid);
      out.layer(a)[static_cast<Eigen::Index>(i)] = (left + right) / h;
    }
  }
  return out;
}

double eval_bilinear(const MultilayerField& v, const MultilayerField& phi,
                     const Discretization& disc, const FormData& form) {
  require_space(v, Space::trial, "eval_bilinear");
  const Layout layout = layout_of(form.variant);
  if (phi.space() != test_space(layout)) {
    throw Error(ErrorCode::layout_mismatch, std::string("variant ") + to_string(form.variant) +
                                                " pairs with " + to_string(test_space(layout)) +
                                                " test fields, got " + to_string(phi.space()));
  }
  require_shape(v, disc);
  require_shape(phi, disc);
  const bool nonflat = form.variant == Variant::nonflat;
  if (nonflat && !form.surface.eta) {
    throw Error(ErrorCode::invalid_argument, "non-flat form needs eta");
  }
  VectorField grad_eta;
  if (nonflat) {
    grad_eta = form.surface.grad_eta ? form.surface.grad_eta
                                     : gradient_of_interpolant(disc.mesh, form.surface.eta);
  }

  const int n = disc.layers();
  const VerticalMomentTable table(VerticalBasis(disc.grid, layout));
  using M = VerticalMomentTable;

  // Vertical coefficients per (test a, trial b), band only.
  struct Coeffs {
    double grad_grad, val_val, z2_val_val, trial_val_test_grad, trial_grad_test_val;
  };
  std::vector<std::array<Coeffs, 3>> band(n);
  for (int a = 1; a <= n; ++a) {
    for (int off = -1; off <= 1; ++off) {
      const int b = a + off;
      band[a - 1][off + 1] = {table(M::kappa_sigma, 0, a, b), table(M::dsigma_dsigma, 0, a, b),
                              table(M::dsigma_dsigma, 2, a, b), table(M::dsigma_sigma, 1, a, b),
                              table(M::kappa_dsigma, 1, a, b)};
    }
  }

  const QuadratureRule& rule = horizontal_rule(disc.mesh.dim);
  std::vector<double> vv(n), pv(n);
  std::vector<std::array<double, 2>> vg(n), pg(n);
  double total = 0.0;
  for (std::size_t c = 0; c < disc.mesh.num_cells(); ++c) {
    const CellGeometry g = cell_geometry(disc.mesh, c);
    // Gradients are constant per cell.
    for (int a = 1; a <= n; ++a) {
      vg[a - 1] = {0.0, 0.0};
      pg[a - 1] = {0.0, 0.0};
      for (int k = 0; k < g.nverts; ++k) {
        const int dof = disc.dofs.vertex_to_dof[g.vertices[k]];
        if (dof < 0) continue;
        const double va = v.layer(a)[dof];
        const double pa = phi.layer(a)[dof];
        for (int d = 0; d < 2; ++d) {
          vg[a - 1][d] += va * g.grads[k][d];
          pg[a - 1][d] += pa * g.grads[k][d];
        }
      }
    }
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.barycentric[q];
      const double w = rule.weights[q] * g.measure;
      for (int a = 1; a <= n; ++a) {
        vv[a - 1] = 0.0;
        pv[a - 1] = 0.0;
        for (int k = 0; k < g.nverts; ++k) {
          const int dof = disc.dofs.vertex_to_dof[g.vertices[k]];
          if (dof < 0) continue;
          vv[a - 1] += lam[k] * v.layer(a)[dof];
          pv[a - 1] += lam[k] * phi.layer(a)[dof];
        }
      }
      double eta = 1.0;
      std::array<double, 2> ge{0.0, 0.0};
      if (nonflat) {
        const HorizontalPoint pt = g.map(lam, c);
        eta = form.surface.eta(pt);
        ge = grad_eta(pt);
      }
      const double ge2 = ge[0] * ge[0] + ge[1] * ge[1];
      double sum = 0.0;
      for (int a = 1; a <= n; ++a) {
        for (int off = -1; off <= 1; ++off) {
          const int b = a + off;
          if (b < 1 || b > n) continue;
          const Coeffs& k = band[a - 1][off + 1];
          const auto& gv = vg[b - 1];
          const auto& gp = pg[a - 1];
          const double gg = gv[0] * gp[0] + gv[1] * gp[1];
          const double val = vv[b - 1] * pv[a - 1];
          if (!nonflat) {
            sum += k.grad_grad * gg + k.val_val * val;
            continue;
          }
          const double eta_dot_test = ge[0] * gp[0] + ge[1] * gp[1];
          const double eta_dot_trial = ge[0] * gv[0] + ge[1] * gv[1];
          sum += eta * k.grad_grad * gg - k.trial_val_test_grad * vv[b - 1] * eta_dot_test -
                 k.trial_grad_test_val * eta_dot_trial * pv[a - 1] + k.val_val * val / eta +
                 k.z2_val_val * ge2 * val / eta;
        }
      }
      total += w * sum;
    }
  }
  return total;
}

double norm_Xh(const MultilayerField& v, const Discretization& disc) {
  require_space(v, Space::trial, "norm_Xh");
  require_shape(v, disc);
  const int n = v.layers();
  const double h = disc.grid.thickness;
  double s = 0.0;
  for (int a = 1; a <= n; ++a) s += h * quad(disc.stiffness, v.layer(a), v.layer(a));
  s += (2.0 / h) * quad(disc.mass, v.layer(1), v.layer(1));
  for (int a = 1; a < n; ++a) {
    const Vector jump = v.layer(a + 1) - v.layer(a);
    s += quad(disc.mass, jump, jump) / h;
  }
  s += (2.0 / h) * quad(disc.mass, v.layer(n), v.layer(n));
  return std::sqrt(std::max(s, 0.0));
}

double norm_Xh_bl(const MultilayerField& v, const Discretization& disc) {
  require_space(v, Space::trial, "norm_Xh_bl");
  require_shape(v, disc);
  const int n = v.layers();
  if (n < 3) {
    throw Error(ErrorCode::unsupported_layer_count, "the H^1_bl discrete norm needs N >= 3");
  }
  const double h = disc.grid.thickness;
  double s = 0.0;
  for (int a = 1; a <= n; ++a) s += h * quad(disc.stiffness, v.layer(a), v.layer(a));
  s += (2.0 / h) * quad(disc.mass, v.layer(1), v.layer(1));
  for (int a = 1; a <= n - 2; ++a) {
    const Vector jump = v.layer(a + 1) - v.layer(a);
    s += quad(disc.mass, jump, jump) / h;
  }
  const Vector top = v.layer(n) - v.layer(n - 1);
  s += quad(disc.mass, top, top) / (1.5 * h);
  return std::sqrt(std::max(s, 0.0));
}

double norm_L2h(const MultilayerField& v, const Discretization& disc) {
  require_shape(v, disc);
  double s = 0.0;
  for (int a = 1; a <= v.layers(); ++a) s += quad(disc.mass, v.layer(a), v.layer(a));
  return std::sqrt(std::max(disc.grid.thickness * s, 0.0));
}

double seminorm_H1_test(const MultilayerField& phi, const Discretization& disc) {
  if (phi.space() == Space::trial) {
    throw Error(ErrorCode::wrong_space_tag, "seminorm_H1_test expects a test-space field");
  }
  require_shape(phi, disc);
  const Layout layout = phi.space() == Space::test_neumann ? Layout::neumann : Layout::dirichlet;
  const VerticalMomentTable table(VerticalBasis(disc.grid, layout));
  using M = VerticalMomentTable;
  const int n = phi.layers();
  double s = 0.0;
  for (int a = 1; a <= n; ++a) {
    const Vector a_phi = disc.stiffness * phi.layer(a);
    const Vector m_phi = disc.mass * phi.layer(a);
    for (int b = std::max(1, a - 1); b <= std::min(n, a + 1); ++b) {
      s += table(M::sigma_sigma, 0, a, b) * phi.layer(b).dot(a_phi) +
           table(M::dsigma_dsigma, 0, a, b) * phi.layer(b).dot(m_phi);
    }
  }
  return std::sqrt(std::max(s, 0.0));
}

SparseMatrix gram_Xh(const Discretization& disc, Layout layout) {
  const VerticalMomentTable table(VerticalBasis(disc.grid, layout));
  const double h = disc.grid.thickness;
  return block_tridiagonal(
      disc.layers(),
      [&](int a, int b) -> SparseMatrix {
        const double vert = table(VerticalMomentTable::dsigma_dsigma, 0, a, b);
        return (a == b ? h : 0.0) * disc.stiffness + vert * disc.mass;
      },
      disc.ndof());
}

SparseMatrix gram_H1_test(const Discretization& disc, Layout layout) {
  const VerticalMomentTable table(VerticalBasis(disc.grid, layout));
  return block_tridiagonal(
      disc.layers(),
      [&](int a, int b) -> SparseMatrix {
        return table(VerticalMomentTable::sigma_sigma, 0, a, b) * disc.stiffness +
               table(VerticalMomentTable::dsigma_dsigma, 0, a, b) * disc.mass;
      },
      disc.ndof());
}

MultilayerField random_field(int layers, std::size_t ndof, Space space, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  MultilayerField f(layers, ndof, space);
  for (Eigen::Index k = 0; k < f.coefficients().size(); ++k) f.coefficients()[k] = dist(rng);
  return f;
}

void write_field_csv(std::ostream& out, const MultilayerField& field, const Discretization& disc) {
  require_shape(field, disc);
  std::vector<double> zs;
  switch (field.space()) {
    case Space::trial:
      zs = disc.grid.midpoints;
      break;
    case Space::test:
      zs = disc.grid.dirichlet_knots();
      zs = std::vector<double>(zs.begin() + 1, zs.end() - 1);
      break;
    case Space::test_neumann:
      zs = disc.grid.neumann_knots();
      zs.erase(zs.begin());
      break;
  }
  out << "layer,dof,x,y,z,value\n";
  char line[256];
  for (int a = 1; a <= field.layers(); ++a) {
    for (std::size_t i = 0; i < field.ndof(); ++i) {
      const auto& p = disc.mesh.vertices[disc.dofs.dof_to_vertex[i]];
      std::snprintf(line, sizeof line, "%d,%zu,%.9g,%.9g,%.9g,%.9g\n", a, i, p[0], p[1],
                    zs[a - 1], field.layer(a)[static_cast<Eigen::Index>(i)]);
      out << line;
    }
  }
}

MultilayerField read_field_csv(std::istream& in, const Discretization& disc, Space space) {
  MultilayerField field(disc.layers(), disc.ndof(), space);
  std::string line;
  if (!std::getline(in, line) || line.rfind("layer,dof", 0) != 0) {
    throw Error(ErrorCode::io_error, "missing field CSV header");
  }
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int a = 0;
    std::size_t i = 0;
    double x = 0, y = 0, z = 0, value = 0;
    if (std::sscanf(line.c_str(), "%d,%zu,%lf,%lf,%lf,%lf", &a, &i, &x, &y, &z, &value) != 6 ||
        a < 1 || a > disc.layers() || i >= disc.ndof()) {
      throw Error(ErrorCode::io_error, "bad field CSV row: " + line);
    }
    field.layer(a)[static_cast<Eigen::Index>(i)] = value;
    ++rows;
  }
  if (rows != static_cast<std::size_t>(disc.layers()) * disc.ndof()) {
    throw Error(ErrorCode::io_error, "field CSV has " + std::to_string(rows) + " rows, expected " +
                                         std::to_string(disc.layers() * disc.ndof()));
  }
  return field;
}

}  // namespace mlpg
