#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mlpg/hfem.hpp"
#include "mlpg/mesh.hpp"
#include "mlpg/vertical.hpp"

namespace mlpg {

enum class Variant { dirichlet_flat, nonflat, neumann };

const char* to_string(Variant v) noexcept;
std::optional<Variant> parse_variant(const std::string& name);

inline Layout layout_of(Variant v) {
  return v == Variant::neumann ? Layout::neumann : Layout::dirichlet;
}

/// Function on the (reference) 3D column: f(x, y, z).
using SpaceField = std::function<double(double x, double y, double z)>;

/// How L(phi_i (x) sigma_a) is evaluated.
enum class RhsMode {
  tensorized,      // int_Omega f phi_i sigma_a by tensor quadrature
  layer_averaged,  // sum_b int kappa_b sigma_a dz * int_omega fbar^b phi_i, fbar^b = layer mean
};

/// What to do when the sampled surface violates |grad eta| < 1.
enum class EtaCheck { strict, warn };

/// Surface z = eta(x) of the physical domain. When `grad_eta` is empty the
/// piecewise-constant gradient of the P1 interpolant of eta is used.
struct Surface {
  ScalarField eta;
  VectorField grad_eta;
};

struct AssemblyOptions {
  RhsMode rhs = RhsMode::tensorized;
  EtaCheck eta_check = EtaCheck::strict;
};

/// Layer-blocked linear system. Row block a (0-based here) reads
///   lower[a] v^{a-1} + diag[a] v^a + upper[a] v^{a+1} = rhs[a]
/// with lower[0] and upper[N-1] empty (0 x 0).
struct BlockTridiagonalSystem {
  Variant variant = Variant::dirichlet_flat;
  LayerGrid grid;
  std::size_t ndof = 0;
  std::vector<SparseMatrix> diag;
  std::vector<SparseMatrix> lower;
  std::vector<SparseMatrix> upper;
  std::vector<Vector> rhs;
  std::vector<std::string> warnings;
  double assembly_seconds = 0.0;

  int layers() const { return grid.layers; }
  std::size_t size() const { return ndof * static_cast<std::size_t>(grid.layers); }

  /// Concatenated matrix, layer-major unknown ordering.
  SparseMatrix global_matrix() const;
  Vector global_rhs() const;

  /// y = A x for the concatenated system.
  Vector apply(const Vector& x) const;
};

BlockTridiagonalSystem assemble_dirichlet_flat(const HorizontalMesh& mesh, const DofMap& dofs,
                                               const LayerGrid& grid, const SpaceField& f,
                                               const AssemblyOptions& options = {});

/// Reference-cylinder system of the sigma-transformed problem. `f` is the
/// source already pulled back to the reference column (Jacobian included).
BlockTridiagonalSystem assemble_nonflat(const HorizontalMesh& mesh, const DofMap& dofs,
                                        const LayerGrid& grid, const Surface& surface,
                                        const SpaceField& f, const AssemblyOptions& options = {});

/// Homogeneous Dirichlet on bottom and sides, flux g on top. The unknown is
/// the part of the solution left after removing g_h = g_k (z - z_s) kappa_N.
BlockTridiagonalSystem assemble_neumann(const HorizontalMesh& mesh, const DofMap& dofs,
                                        const LayerGrid& grid, const SpaceField& f,
                                        const ScalarField& g, const AssemblyOptions& options = {});

/// int_Omega f phi_i sigma_a for every layer a, by tensor quadrature.
std::vector<Vector> assemble_layer_loads(const HorizontalMesh& mesh, const DofMap& dofs,
                                         const VerticalBasis& basis, const SpaceField& f,
                                         RhsMode mode);

/// Largest |grad eta| and smallest eta over vertices and quadrature points.
struct SurfaceSample {
  double eta_min = 0.0;
  double eta_max = 0.0;
  double grad_max = 0.0;
};
SurfaceSample sample_surface(const HorizontalMesh& mesh, const Surface& surface);

}  // namespace mlpg
