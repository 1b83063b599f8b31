#include "mlpg/assembly.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mlpg/error.hpp"

namespace mlpg {

const char* to_string(Variant v) noexcept {
  switch (v) {
    case Variant::dirichlet_flat:
      return "dirichlet-flat";
    case Variant::nonflat:
      return "nonflat";
    case Variant::neumann:
      return "neumann";
  }
  return "?";
}

std::optional<Variant> parse_variant(const std::string& name) {
  if (name == "dirichlet-flat") return Variant::dirichlet_flat;
  if (name == "nonflat") return Variant::nonflat;
  if (name == "neumann") return Variant::neumann;
  return std::nullopt;
}

SparseMatrix BlockTridiagonalSystem::global_matrix() const {
  const int n = layers();
  const auto nd = static_cast<int>(ndof);
  std::vector<Eigen::Triplet<double, int>> triplets;
  auto push = [&](const SparseMatrix& block, int row_layer, int col_layer) {
    for (int r = 0; r < block.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(block, r); it; ++it) {
        triplets.emplace_back(row_layer * nd + r, col_layer * nd + it.col(), it.value());
      }
    }
  };
  for (int a = 0; a < n; ++a) {
    push(diag[a], a, a);
    if (a > 0) push(lower[a], a, a - 1);
    if (a + 1 < n) push(upper[a], a, a + 1);
  }
  SparseMatrix global(n * nd, n * nd);
  global.setFromTriplets(triplets.begin(), triplets.end());
  global.makeCompressed();
  return global;
}

Vector BlockTridiagonalSystem::global_rhs() const {
  Vector b(static_cast<Eigen::Index>(size()));
  const auto nd = static_cast<Eigen::Index>(ndof);
  for (int a = 0; a < layers(); ++a) b.segment(a * nd, nd) = rhs[a];
  return b;
}

Vector BlockTridiagonalSystem::apply(const Vector& x) const {
  Vector y(x.size());
  const auto nd = static_cast<Eigen::Index>(ndof);
  const int n = layers();
  for (int a = 0; a < n; ++a) {
    auto out = y.segment(a * nd, nd);
    out = diag[a] * x.segment(a * nd, nd);
    if (a > 0) out += lower[a] * x.segment((a - 1) * nd, nd);
    if (a + 1 < n) out += upper[a] * x.segment((a + 1) * nd, nd);
  }
  return y;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Fills the tridiagonal block pattern from a (test a, trial b) -> matrix rule
// with 1-based layer indices.
template <class BlockRule>
void fill_blocks(BlockTridiagonalSystem& sys, BlockRule&& block) {
  const int n = sys.layers();
  sys.diag.resize(n);
  sys.lower.resize(n);
  sys.upper.resize(n);
  for (int a = 1; a <= n; ++a) {
    sys.diag[a - 1] = block(a, a);
    sys.lower[a - 1] = a > 1 ? block(a, a - 1) : SparseMatrix();
    sys.upper[a - 1] = a < n ? block(a, a + 1) : SparseMatrix();
  }
}

// Affine pieces of the (at most two) test functions living on one
// elementary interval.
struct ElementaryInterval {
  double lo = 0.0;
  double hi = 0.0;
  int layer = 0;
  std::array<int, 2> tests{0, 0};  // 0 = unused
  std::array<Affine, 2> pieces{};
};

std::vector<ElementaryInterval> elementary_intervals(const VerticalBasis& basis) {
  const auto& br = basis.breakpoints();
  std::vector<ElementaryInterval> out;
  for (std::size_t e = 0; e + 1 < br.size(); ++e) {
    ElementaryInterval iv;
    iv.lo = br[e];
    iv.hi = br[e + 1];
    iv.layer = basis.layer_of(iv.lo, iv.hi);
    int slot = 0;
    for (int a = 1; a <= basis.size() && slot < 2; ++a) {
      const Affine piece = basis.test_piece(a, iv.lo, iv.hi);
      if (piece.c0 == 0.0 && piece.c1 == 0.0) continue;
      iv.tests[slot] = a;
      iv.pieces[slot] = piece;
      ++slot;
    }
    out.push_back(iv);
  }
  return out;
}

}  // namespace

std::vector<Vector> assemble_layer_loads(const HorizontalMesh& mesh, const DofMap& dofs,
                                         const VerticalBasis& basis, const SpaceField& f,
                                         RhsMode mode) {
  const int n = basis.size();
  const auto nd = static_cast<Eigen::Index>(dofs.ndof());
  std::vector<Vector> loads(n, Vector::Zero(nd));
  const auto intervals = elementary_intervals(basis);
  const QuadratureRule& hrule = horizontal_rule(mesh.dim);
  const QuadratureRule& zrule = gauss_segment(2);
  const double h = basis.grid().thickness;

  // Layer means of f are only needed in layer_averaged mode.
  std::vector<double> layer_mean(n);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry g = cell_geometry(mesh, c);
    for (std::size_t q = 0; q < hrule.size(); ++q) {
      const auto& lam = hrule.barycentric[q];
      const HorizontalPoint pt = g.map(lam, c);
      const double wh = hrule.weights[q] * g.measure;
      if (mode == RhsMode::layer_averaged) std::fill(layer_mean.begin(), layer_mean.end(), 0.0);
      for (const auto& iv : intervals) {
        const double len = iv.hi - iv.lo;
        for (std::size_t r = 0; r < zrule.size(); ++r) {
          const double z = iv.lo + zrule.barycentric[r][1] * len;
          const double fz = f(pt.x, pt.y, z) * zrule.weights[r] * len;
          if (mode == RhsMode::layer_averaged) {
            layer_mean[iv.layer - 1] += fz / h;
            continue;
          }
          for (int s = 0; s < 2; ++s) {
            if (iv.tests[s] == 0) continue;
            const double weight = wh * fz * iv.pieces[s](z);
            for (int i = 0; i < g.nverts; ++i) {
              const int row = dofs.vertex_to_dof[g.vertices[i]];
              if (row >= 0) loads[iv.tests[s] - 1][row] += weight * lam[i];
            }
          }
        }
      }
      if (mode == RhsMode::layer_averaged) {
        for (int b = 0; b < n; ++b) {
          for (int i = 0; i < g.nverts; ++i) {
            const int row = dofs.vertex_to_dof[g.vertices[i]];
            if (row >= 0) loads[b][row] += wh * layer_mean[b] * lam[i];
          }
        }
      }
    }
  }
  if (mode == RhsMode::layer_averaged) {
    // loads[b] currently holds int_omega fbar^b phi_i.
    const VerticalMomentTable table(basis);
    std::vector<Vector> mixed(n, Vector::Zero(nd));
    for (int a = 1; a <= n; ++a) {
      for (int b = std::max(1, a - 1); b <= std::min(n, a + 1); ++b) {
        mixed[a - 1] += table(VerticalMomentTable::kappa_sigma, 0, a, b) * loads[b - 1];
      }
    }
    return mixed;
  }
  return loads;
}

SurfaceSample sample_surface(const HorizontalMesh& mesh, const Surface& surface) {
  const VectorField grad =
      surface.grad_eta ? surface.grad_eta : gradient_of_interpolant(mesh, surface.eta);
  SurfaceSample s;
  s.eta_min = std::numeric_limits<double>::infinity();
  s.eta_max = -s.eta_min;
  auto visit = [&](const HorizontalPoint& p) {
    const double e = surface.eta(p);
    const auto g = grad(p);
    s.eta_min = std::min(s.eta_min, e);
    s.eta_max = std::max(s.eta_max, e);
    s.grad_max = std::max(s.grad_max, std::hypot(g[0], g[1]));
  };
  const QuadratureRule& rule = horizontal_rule(mesh.dim);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry g = cell_geometry(mesh, c);
    for (int v = 0; v < g.nverts; ++v) visit({g.coords[v][0], g.coords[v][1], c});
    for (const auto& lam : rule.barycentric) visit(g.map(lam, c));
  }
  return s;
}

BlockTridiagonalSystem assemble_dirichlet_flat(const HorizontalMesh& mesh, const DofMap& dofs,
                                               const LayerGrid& grid, const SpaceField& f,
                                               const AssemblyOptions& options) {
  const auto start = Clock::now();
  const VerticalBasis basis(grid, Layout::dirichlet);
  const VerticalMomentTable table(basis);
  const SparseMatrix stiffness = assemble_weighted_stiffness(mesh, dofs, constant_field(1.0));
  const SparseMatrix mass = assemble_weighted_mass(mesh, dofs, constant_field(1.0));

  BlockTridiagonalSystem sys;
  sys.variant = Variant::dirichlet_flat;
  sys.grid = grid;
  sys.ndof = dofs.ndof();
  fill_blocks(sys, [&](int a, int b) -> SparseMatrix {
    return table(VerticalMomentTable::kappa_sigma, 0, a, b) * stiffness +
           table(VerticalMomentTable::dsigma_dsigma, 0, a, b) * mass;
  });
  sys.rhs = assemble_layer_loads(mesh, dofs, basis, f, options.rhs);
  sys.assembly_seconds = seconds_since(start);
  return sys;
}

BlockTridiagonalSystem assemble_nonflat(const HorizontalMesh& mesh, const DofMap& dofs,
                                        const LayerGrid& grid, const Surface& surface,
                                        const SpaceField& f, const AssemblyOptions& options) {
  const auto start = Clock::now();
  if (!surface.eta) throw Error(ErrorCode::invalid_argument, "non-flat problem needs eta");
  BlockTridiagonalSystem sys;
  sys.variant = Variant::nonflat;
  sys.grid = grid;
  sys.ndof = dofs.ndof();

  const SurfaceSample sample = sample_surface(mesh, surface);
  if (!(sample.eta_min > 0.0)) {
    throw Error(ErrorCode::eta_condition_violated,
                "eta must be strictly positive, sampled minimum " + std::to_string(sample.eta_min));
  }
  if (!(sample.grad_max < 1.0)) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "sampled max |grad eta| = %.9g is not below 1",
                  sample.grad_max);
    if (options.eta_check == EtaCheck::strict) {
      throw Error(ErrorCode::eta_condition_violated, msg);
    }
    sys.warnings.emplace_back(msg);
  }

  const ScalarField& eta = surface.eta;
  const VectorField grad =
      surface.grad_eta ? surface.grad_eta : gradient_of_interpolant(mesh, surface.eta);
  const SparseMatrix stiffness = assemble_weighted_stiffness(mesh, dofs, eta);
  const SparseMatrix mass_inv = assemble_weighted_mass(
      mesh, dofs, [&](const HorizontalPoint& p) { return 1.0 / eta(p); });
  const SparseMatrix mass_slope = assemble_weighted_mass(mesh, dofs, [&](const HorizontalPoint& p) {
    const auto g = grad(p);
    return (g[0] * g[0] + g[1] * g[1]) / eta(p);
  });
  const SparseMatrix coupling = assemble_gradient_coupling(mesh, dofs, grad);
  const SparseMatrix coupling_t = coupling.transpose();

  const VerticalBasis basis(grid, Layout::dirichlet);
  const VerticalMomentTable table(basis);
  using M = VerticalMomentTable;
  // eta [grad v . grad phi + dz(Tv) K3H . grad phi + grad v . K3H dz phi + K33 dz(Tv) dz phi]
  // with K3H = -(z/eta) grad eta and K33 = 1/eta^2 + z^2 |grad eta|^2 / eta^2.
  fill_blocks(sys, [&](int a, int b) -> SparseMatrix {
    return table(M::kappa_sigma, 0, a, b) * stiffness -
           table(M::dsigma_sigma, 1, a, b) * coupling_t -
           table(M::kappa_dsigma, 1, a, b) * coupling +
           table(M::dsigma_dsigma, 0, a, b) * mass_inv +
           table(M::dsigma_dsigma, 2, a, b) * mass_slope;
  });
  sys.rhs = assemble_layer_loads(mesh, dofs, basis, f, options.rhs);
  sys.assembly_seconds = seconds_since(start);
  return sys;
}

BlockTridiagonalSystem assemble_neumann(const HorizontalMesh& mesh, const DofMap& dofs,
                                        const LayerGrid& grid, const SpaceField& f,
                                        const ScalarField& g, const AssemblyOptions& options) {
  const auto start = Clock::now();
  const VerticalBasis basis(grid, Layout::neumann);
  const int n = grid.layers;

  const std::vector<double> g_nodal = nodal_values(mesh, g);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (mesh.on_boundary[v] && std::abs(g_nodal[v]) > 1e-12) {
      char msg[160];
      std::snprintf(msg, sizeof msg, "g(%.6g, %.6g) = %.9g on the lateral boundary",
                    mesh.vertices[v][0], mesh.vertices[v][1], g_nodal[v]);
      throw Error(ErrorCode::g_not_zero_on_boundary, msg);
    }
  }

  const VerticalMomentTable table(basis);
  const SparseMatrix stiffness = assemble_weighted_stiffness(mesh, dofs, constant_field(1.0));
  const SparseMatrix mass = assemble_weighted_mass(mesh, dofs, constant_field(1.0));

  BlockTridiagonalSystem sys;
  sys.variant = Variant::neumann;
  sys.grid = grid;
  sys.ndof = dofs.ndof();
  fill_blocks(sys, [&](int a, int b) -> SparseMatrix {
    return table(VerticalMomentTable::kappa_sigma, 0, a, b) * stiffness +
           table(VerticalMomentTable::dsigma_dsigma, 0, a, b) * mass;
  });

  sys.rhs = assemble_layer_loads(mesh, dofs, basis, f, options.rhs);
  sys.rhs[n - 1] += assemble_load(mesh, dofs, g);

  // Subtract the lifting g_h = g_k (z - z_s) kappa_N through the layer-wise
  // form: volume terms inside layer N plus the jump -h g_k across z_{N-1/2}.
  Vector g_k(static_cast<Eigen::Index>(dofs.ndof()));
  for (std::size_t i = 0; i < dofs.ndof(); ++i) g_k[i] = g_nodal[dofs.dof_to_vertex[i]];
  const Vector stiff_g = stiffness * g_k;
  const Vector mass_g = mass * g_k;
  const double h = grid.thickness;
  const double zs = grid.top();
  const double z_jump = grid.interfaces[n - 1];
  using M = VerticalMomentTable;
  for (int a = std::max(1, n - 2); a <= n; ++a) {
    const double horiz = table(M::kappa_sigma, 1, a, n) - zs * table(M::kappa_sigma, 0, a, n);
    const double vert = table(M::kappa_dsigma, 0, a, n);
    const double slope_at_jump = basis.test_piece(a, z_jump, z_jump + 0.5 * h).c1;
    sys.rhs[a - 1] -= horiz * stiff_g + (vert - h * slope_at_jump) * mass_g;
  }
  sys.assembly_seconds = seconds_since(start);
  return sys;
}

}  // namespace mlpg
