#include "mlpg/mesh.hpp"

#include <cmath>
#include <string>

#include "mlpg/error.hpp"

namespace mlpg {

LayerGrid build_layer_grid(double height, int layers) {
  if (layers < 2) {
    throw Error(ErrorCode::invalid_layer_count,
                "need at least 2 layers, got " + std::to_string(layers));
  }
  if (!(height > 0.0) || !std::isfinite(height)) {
    throw Error(ErrorCode::invalid_argument, "domain height must be positive");
  }
  LayerGrid grid;
  grid.height = height;
  grid.layers = layers;
  grid.thickness = height / layers;
  grid.interfaces.resize(layers + 1);
  for (int a = 0; a < layers; ++a) grid.interfaces[a] = a * grid.thickness;
  grid.interfaces[layers] = height;
  grid.midpoints.resize(layers);
  for (int a = 0; a < layers; ++a) {
    grid.midpoints[a] = 0.5 * (grid.interfaces[a] + grid.interfaces[a + 1]);
  }
  return grid;
}

std::vector<double> LayerGrid::dirichlet_knots() const {
  std::vector<double> knots;
  knots.reserve(layers + 2);
  knots.push_back(bottom());
  knots.insert(knots.end(), midpoints.begin(), midpoints.end());
  knots.push_back(top());
  return knots;
}

std::vector<double> LayerGrid::neumann_knots() const {
  std::vector<double> knots;
  knots.reserve(layers + 1);
  knots.push_back(bottom());
  knots.insert(knots.end(), midpoints.begin(), midpoints.end() - 1);
  knots.push_back(top());
  return knots;
}

double HorizontalMesh::cell_measure(std::size_t c) const {
  const auto& cell = cells[c];
  const auto& p0 = vertices[cell[0]];
  const auto& p1 = vertices[cell[1]];
  if (dim == 1) return std::abs(p1[0] - p0[0]);
  const auto& p2 = vertices[cell[2]];
  return 0.5 * std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

double HorizontalMesh::total_measure() const {
  double sum = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) sum += cell_measure(c);
  return sum;
}

namespace {

DofMap number_interior(const HorizontalMesh& mesh) {
  DofMap dofs;
  dofs.vertex_to_dof.assign(mesh.vertices.size(), -1);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (mesh.on_boundary[v]) continue;
    dofs.vertex_to_dof[v] = static_cast<int>(dofs.dof_to_vertex.size());
    dofs.dof_to_vertex.push_back(static_cast<int>(v));
  }
  return dofs;
}

}  // namespace

DofMap full_dof_map(const HorizontalMesh& mesh) {
  DofMap dofs;
  dofs.vertex_to_dof.resize(mesh.vertices.size());
  dofs.dof_to_vertex.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    dofs.vertex_to_dof[v] = static_cast<int>(v);
    dofs.dof_to_vertex[v] = static_cast<int>(v);
  }
  return dofs;
}

StructuredMesh build_structured_mesh(int dim, int cells_per_side) {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorCode::invalid_argument, "horizontal dimension must be 1 or 2");
  }
  if (cells_per_side < 2) {
    throw Error(ErrorCode::mesh_too_coarse,
                "need at least 2 cells per side, got " + std::to_string(cells_per_side));
  }
  const int n = cells_per_side;
  const double k = 1.0 / n;
  HorizontalMesh mesh;
  mesh.dim = dim;

  if (dim == 1) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices.push_back({i == n ? 1.0 : i * k, 0.0});
      mesh.on_boundary.push_back(i == 0 || i == n);
    }
    for (int i = 0; i < n; ++i) mesh.cells.push_back({i, i + 1, -1});
  } else {
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        mesh.vertices.push_back({i == n ? 1.0 : i * k, j == n ? 1.0 : j * k});
        mesh.on_boundary.push_back(i == 0 || j == 0 || i == n || j == n);
      }
    }
    // Lower-left to upper-right diagonal; both triangles counter-clockwise.
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        mesh.cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        mesh.cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  }

  StructuredMesh out;
  out.dofs = number_interior(mesh);
  out.mesh = std::move(mesh);
  return out;
}

}  // namespace mlpg
