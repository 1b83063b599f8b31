#include "mlpg/hfem.hpp"

#include <cmath>
#include <memory>

#include "mlpg/error.hpp"

namespace mlpg {

ScalarField constant_field(double value) {
  return [value](const HorizontalPoint&) { return value; };
}

VectorField constant_vector_field(double bx, double by) {
  return [bx, by](const HorizontalPoint&) { return std::array<double, 2>{bx, by}; };
}

namespace {

QuadratureRule make_gauss_segment(int points) {
  QuadratureRule rule;
  auto add = [&rule](double t, double w) {
    rule.barycentric.push_back({1.0 - t, t, 0.0});
    rule.weights.push_back(w);
  };
  switch (points) {
    case 1:
      add(0.5, 1.0);
      break;
    case 2: {
      const double d = 0.5 / std::sqrt(3.0);
      add(0.5 - d, 0.5);
      add(0.5 + d, 0.5);
      break;
    }
    case 3: {
      const double d = 0.5 * std::sqrt(0.6);
      add(0.5 - d, 5.0 / 18.0);
      add(0.5, 8.0 / 18.0);
      add(0.5 + d, 5.0 / 18.0);
      break;
    }
    default:
      throw Error(ErrorCode::invalid_argument, "gauss_segment supports 1 to 3 points");
  }
  return rule;
}

// Symmetric 6-point rule, exact for polynomials of degree 4.
QuadratureRule make_triangle_rule() {
  constexpr double a = 0.44594849091596488631832925388305;
  constexpr double wa = 0.22338158967801146569500700843312;
  constexpr double b = 0.091576213509770743459571463402202;
  constexpr double wb = 0.10995174365532186763832632490021;
  QuadratureRule rule;
  for (auto [p, w] : {std::pair{a, wa}, std::pair{b, wb}}) {
    const double q = 1.0 - 2.0 * p;
    rule.barycentric.push_back({q, p, p});
    rule.barycentric.push_back({p, q, p});
    rule.barycentric.push_back({p, p, q});
    rule.weights.insert(rule.weights.end(), 3, w);
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_segment(int points) {
  static const std::array<QuadratureRule, 3> rules{make_gauss_segment(1), make_gauss_segment(2),
                                                   make_gauss_segment(3)};
  if (points < 1 || points > 3) {
    throw Error(ErrorCode::invalid_argument, "gauss_segment supports 1 to 3 points");
  }
  return rules[points - 1];
}

const QuadratureRule& horizontal_rule(int dim) {
  static const QuadratureRule triangle = make_triangle_rule();
  return dim == 1 ? gauss_segment(3) : triangle;
}

HorizontalPoint CellGeometry::map(const std::array<double, 3>& bary, std::size_t cell) const {
  HorizontalPoint p;
  p.cell = cell;
  for (int v = 0; v < nverts; ++v) {
    p.x += bary[v] * coords[v][0];
    p.y += bary[v] * coords[v][1];
  }
  return p;
}

CellGeometry cell_geometry(const HorizontalMesh& mesh, std::size_t cell) {
  CellGeometry g;
  g.nverts = mesh.vertices_per_cell();
  for (int v = 0; v < g.nverts; ++v) {
    g.vertices[v] = mesh.cells[cell][v];
    g.coords[v] = mesh.vertices[g.vertices[v]];
  }
  if (g.nverts == 2) {
    const double len = g.coords[1][0] - g.coords[0][0];
    g.measure = std::abs(len);
    g.grads[0] = {-1.0 / len, 0.0};
    g.grads[1] = {1.0 / len, 0.0};
    return g;
  }
  const auto& p0 = g.coords[0];
  const auto& p1 = g.coords[1];
  const auto& p2 = g.coords[2];
  const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
  g.measure = 0.5 * std::abs(det);
  // grad(lambda_i) is the rotated opposite edge divided by det.
  g.grads[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
  g.grads[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
  g.grads[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
  return g;
}

namespace {

// Shared driver: the kernel fills an nverts x nverts local matrix
// local(i, j) for test vertex i and trial vertex j.
template <class Kernel>
SparseMatrix assemble_cells(const HorizontalMesh& mesh, const DofMap& dofs, Kernel&& kernel) {
  const auto n = static_cast<Eigen::Index>(dofs.ndof());
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(mesh.num_cells() * 9);
  const QuadratureRule& rule = horizontal_rule(mesh.dim);
  Eigen::Matrix3d local;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry g = cell_geometry(mesh, c);
    local.setZero();
    kernel(g, c, rule, local);
    for (int i = 0; i < g.nverts; ++i) {
      const int row = dofs.vertex_to_dof[g.vertices[i]];
      if (row < 0) continue;
      for (int j = 0; j < g.nverts; ++j) {
        const int col = dofs.vertex_to_dof[g.vertices[j]];
        if (col < 0) continue;
        triplets.emplace_back(row, col, local(i, j));
      }
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SparseMatrix assemble_weighted_stiffness(const HorizontalMesh& mesh, const DofMap& dofs,
                                         const ScalarField& c) {
  return assemble_cells(mesh, dofs, [&](const CellGeometry& g, std::size_t cell,
                                        const QuadratureRule& rule, Eigen::Matrix3d& local) {
    double integral = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      integral += rule.weights[q] * c(g.map(rule.barycentric[q], cell));
    }
    integral *= g.measure;
    for (int i = 0; i < g.nverts; ++i) {
      for (int j = 0; j < g.nverts; ++j) {
        local(i, j) = integral * (g.grads[i][0] * g.grads[j][0] + g.grads[i][1] * g.grads[j][1]);
      }
    }
  });
}

SparseMatrix assemble_weighted_mass(const HorizontalMesh& mesh, const DofMap& dofs,
                                    const ScalarField& c) {
  return assemble_cells(mesh, dofs, [&](const CellGeometry& g, std::size_t cell,
                                        const QuadratureRule& rule, Eigen::Matrix3d& local) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.barycentric[q];
      const double w = rule.weights[q] * g.measure * c(g.map(lam, cell));
      for (int i = 0; i < g.nverts; ++i) {
        for (int j = 0; j < g.nverts; ++j) local(i, j) += w * lam[i] * lam[j];
      }
    }
  });
}

SparseMatrix assemble_gradient_coupling(const HorizontalMesh& mesh, const DofMap& dofs,
                                        const VectorField& b) {
  return assemble_cells(mesh, dofs, [&](const CellGeometry& g, std::size_t cell,
                                        const QuadratureRule& rule, Eigen::Matrix3d& local) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.barycentric[q];
      const auto bq = b(g.map(lam, cell));
      const double w = rule.weights[q] * g.measure;
      for (int j = 0; j < g.nverts; ++j) {
        const double flux = bq[0] * g.grads[j][0] + bq[1] * g.grads[j][1];
        for (int i = 0; i < g.nverts; ++i) local(i, j) += w * flux * lam[i];
      }
    }
  });
}

Vector assemble_load(const HorizontalMesh& mesh, const DofMap& dofs, const ScalarField& f) {
  Vector load = Vector::Zero(static_cast<Eigen::Index>(dofs.ndof()));
  const QuadratureRule& rule = horizontal_rule(mesh.dim);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry g = cell_geometry(mesh, c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.barycentric[q];
      const double w = rule.weights[q] * g.measure * f(g.map(lam, c));
      for (int i = 0; i < g.nverts; ++i) {
        const int row = dofs.vertex_to_dof[g.vertices[i]];
        if (row >= 0) load[row] += w * lam[i];
      }
    }
  }
  return load;
}

std::vector<double> nodal_values(const HorizontalMesh& mesh, const ScalarField& f) {
  // Vertex values are tagged with the first cell that touches them.
  std::vector<std::size_t> owner(mesh.vertices.size(), 0);
  for (std::size_t c = mesh.num_cells(); c-- > 0;) {
    for (int v = 0; v < mesh.vertices_per_cell(); ++v) owner[mesh.cells[c][v]] = c;
  }
  std::vector<double> values(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    values[v] = f({mesh.vertices[v][0], mesh.vertices[v][1], owner[v]});
  }
  return values;
}

VectorField gradient_of_interpolant(const HorizontalMesh& mesh, const ScalarField& f) {
  const auto values = nodal_values(mesh, f);
  auto grads = std::make_shared<std::vector<std::array<double, 2>>>(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry g = cell_geometry(mesh, c);
    std::array<double, 2> grad{0.0, 0.0};
    for (int v = 0; v < g.nverts; ++v) {
      grad[0] += values[g.vertices[v]] * g.grads[v][0];
      grad[1] += values[g.vertices[v]] * g.grads[v][1];
    }
    (*grads)[c] = grad;
  }
  return [grads](const HorizontalPoint& p) { return (*grads)[p.cell]; };
}

}  // namespace mlpg
