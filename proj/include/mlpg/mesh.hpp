#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace mlpg {

/// Vertical decomposition of [0, L] into N layers of thickness h = L/N.
///
/// Layers are numbered 1..N as in the usual multilayer notation; the
/// containers below are 0-based, so `midpoints[a-1]` is the midpoint of
/// layer a.
struct LayerGrid {
  double height = 0.0;
  int layers = 0;
  double thickness = 0.0;
  std::vector<double> interfaces;  // z_{a+1/2}, a = 0..N
  std::vector<double> midpoints;   // z_a, a = 1..N

  /// Knots z_b, z_1, ..., z_N, z_s of the Dirichlet test functions. The
  /// consecutive pairs are the N+1 test intervals (h/2, h, ..., h, h/2).
  std::vector<double> dirichlet_knots() const;

  /// Knots z_b, z_1, ..., z_{N-1}, z_s of the top-Neumann test functions.
  /// The last interval [z_{N-1}, z_s] has length 3h/2.
  std::vector<double> neumann_knots() const;

  double bottom() const { return 0.0; }
  double top() const { return height; }
};

LayerGrid build_layer_grid(double height, int layers);

struct HorizontalMesh {
  int dim = 2;  // 1: segments on ]0,1[, 2: triangles on ]0,1[^2
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> cells;  // 2 entries used when dim == 1
  std::vector<bool> on_boundary;

  int vertices_per_cell() const { return dim + 1; }
  std::size_t num_cells() const { return cells.size(); }
  double cell_measure(std::size_t c) const;
  double total_measure() const;
};

/// Interior vertex -> unknown numbering (boundary vertices carry no dof).
struct DofMap {
  std::vector<int> vertex_to_dof;  // -1 on the boundary
  std::vector<int> dof_to_vertex;

  std::size_t ndof() const { return dof_to_vertex.size(); }
};

struct StructuredMesh {
  HorizontalMesh mesh;
  DofMap dofs;
};

/// Numbers every vertex, boundary included. Assembling with this map gives
/// the matrices before Dirichlet elimination.
DofMap full_dof_map(const HorizontalMesh& mesh);

/// Uniform mesh of the unit interval (dim 1) or unit square (dim 2) with
/// NH cells per direction. Squares are cut along the diagonal of positive
/// slope.
StructuredMesh build_structured_mesh(int dim, int cells_per_side);

}  // namespace mlpg
