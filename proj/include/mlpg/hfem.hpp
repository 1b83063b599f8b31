#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mlpg/mesh.hpp"

namespace mlpg {

/// Compressed sparse row matrix over interior dofs.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;

/// A point of the horizontal domain, tagged with the cell it was generated
/// from so that piecewise data (e.g. P1 gradients) can be evaluated without a
/// point location step.
struct HorizontalPoint {
  double x = 0.0;
  double y = 0.0;
  std::size_t cell = 0;
};

using ScalarField = std::function<double(const HorizontalPoint&)>;
using VectorField = std::function<std::array<double, 2>(const HorizontalPoint&)>;

ScalarField constant_field(double value);
VectorField constant_vector_field(double bx, double by);

/// Quadrature on the reference simplex in barycentric coordinates. Weights
/// sum to one and are scaled by the cell measure at use.
struct QuadratureRule {
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// 3-point Gauss on segments (degree 5), 6-point rule on triangles (degree 4).
const QuadratureRule& horizontal_rule(int dim);

/// Gauss-Legendre rule on [0, 1] with n = 1..3 points.
const QuadratureRule& gauss_segment(int points);

/// Affine data of one P1 cell: measure and the constant gradients of its
/// barycentric (hat) functions.
struct CellGeometry {
  int nverts = 0;
  std::array<int, 3> vertices{};
  std::array<std::array<double, 2>, 3> coords{};
  std::array<std::array<double, 2>, 3> grads{};
  double measure = 0.0;

  HorizontalPoint map(const std::array<double, 3>& bary, std::size_t cell) const;
};

CellGeometry cell_geometry(const HorizontalMesh& mesh, std::size_t cell);

/// A_ij = int c grad(phi_j) . grad(phi_i)
SparseMatrix assemble_weighted_stiffness(const HorizontalMesh& mesh, const DofMap& dofs,
                                         const ScalarField& c);

/// M_ij = int c phi_j phi_i
SparseMatrix assemble_weighted_mass(const HorizontalMesh& mesh, const DofMap& dofs,
                                    const ScalarField& c);

/// C_ij = int (b . grad(phi_j)) phi_i. Not symmetric in general.
SparseMatrix assemble_gradient_coupling(const HorizontalMesh& mesh, const DofMap& dofs,
                                        const VectorField& b);

/// b_i = int f phi_i
Vector assemble_load(const HorizontalMesh& mesh, const DofMap& dofs, const ScalarField& f);

/// Nodal values of f at every mesh vertex.
std::vector<double> nodal_values(const HorizontalMesh& mesh, const ScalarField& f);

/// Piecewise-constant gradient of the P1 interpolant of f. Evaluation uses the
/// cell tag of the point.
VectorField gradient_of_interpolant(const HorizontalMesh& mesh, const ScalarField& f);

}  // namespace mlpg
