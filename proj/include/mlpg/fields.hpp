#pragma once

#include <iosfwd>
#include <random>

#include "mlpg/assembly.hpp"
#include "mlpg/hfem.hpp"
#include "mlpg/mesh.hpp"
#include "mlpg/vertical.hpp"

namespace mlpg {

/// Which vertical profile the layer coefficients multiply.
enum class Space {
  trial,         // kappa_a: layer-wise constants (X_h)
  test,          // sigma_a (Y_h)
  test_neumann,  // sigma-hat_a (Y-hat_h)
};

const char* to_string(Space s) noexcept;

inline Space test_space(Layout layout) {
  return layout == Layout::neumann ? Space::test_neumann : Space::test;
}

/// Everything a field needs to be measured: layers, horizontal mesh, and the
/// unit-weight horizontal stiffness and mass matrices.
struct Discretization {
  LayerGrid grid;
  HorizontalMesh mesh;
  DofMap dofs;
  SparseMatrix stiffness;
  SparseMatrix mass;

  std::size_t ndof() const { return dofs.ndof(); }
  int layers() const { return grid.layers; }
};

Discretization make_discretization(double height, int layers, int dim, int cells_per_side);

/// Coefficients u[a][i] of a multilayer function, stored layer-major.
class MultilayerField {
 public:
  MultilayerField() = default;
  MultilayerField(int layers, std::size_t ndof, Space space);
  MultilayerField(int layers, std::size_t ndof, Space space, Vector coefficients);

  int layers() const { return layers_; }
  std::size_t ndof() const { return ndof_; }
  Space space() const { return space_; }

  const Vector& coefficients() const { return coeffs_; }
  Vector& coefficients() { return coeffs_; }

  /// Coefficients of layer a (1-based).
  auto layer(int a) { return coeffs_.segment(offset(a), static_cast<Eigen::Index>(ndof_)); }
  auto layer(int a) const { return coeffs_.segment(offset(a), static_cast<Eigen::Index>(ndof_)); }

  MultilayerField& operator*=(double s) {
    coeffs_ *= s;
    return *this;
  }

 private:
  Eigen::Index offset(int a) const {
    return static_cast<Eigen::Index>(a - 1) * static_cast<Eigen::Index>(ndof_);
  }

  int layers_ = 0;
  std::size_t ndof_ = 0;
  Space space_ = Space::trial;
  Vector coeffs_;
};

/// T_h / T-hat_h: same coefficients, now read against the test profile.
MultilayerField lift_Th(const MultilayerField& v, Layout layout);

/// Pi_h v: layer means of the vertically piecewise-affine nodal interpolant
/// through (x_i, z_b), (x_i, z_1), ..., (x_i, z_N), (x_i, z_s).
MultilayerField interpolate_Pih(const SpaceField& v, const Discretization& disc);

/// Coefficients that the bilinear forms need beyond the mesh.
struct FormData {
  Variant variant = Variant::dirichlet_flat;
  Surface surface;  // nonflat only
};

/// a_h, a_{K,h} or a-hat_h evaluated by horizontal quadrature and vertical
/// moments, without going through an assembled matrix.
double eval_bilinear(const MultilayerField& v, const MultilayerField& phi,
                     const Discretization& disc, const FormData& form);

/// Discrete H^1_0 norm of X_h (two half-interval boundary terms).
double norm_Xh(const MultilayerField& v, const Discretization& disc);
/// Discrete H^1_bl norm of X_h (3h/2 top interval, no top boundary term).
double norm_Xh_bl(const MultilayerField& v, const Discretization& disc);
/// (h sum_a ||v^a||^2_{0,omega})^{1/2}
double norm_L2h(const MultilayerField& v, const Discretization& disc);
/// ||grad phi||_{0,Omega} for a test-space field, exact in z.
double seminorm_H1_test(const MultilayerField& phi, const Discretization& disc);

/// Gram matrices of the norms above, on the layer-major coefficient vector.
SparseMatrix gram_Xh(const Discretization& disc, Layout layout);
SparseMatrix gram_H1_test(const Discretization& disc, Layout layout);

/// Coefficients i.i.d. uniform on [-1, 1].
MultilayerField random_field(int layers, std::size_t ndof, Space space, std::mt19937_64& rng);

/// One row per (layer, dof): layer,dof,x,y,z,value. z is the layer midpoint
/// for trial fields and the knot of the test profile otherwise.
void write_field_csv(std::ostream& out, const MultilayerField& field, const Discretization& disc);
MultilayerField read_field_csv(std::istream& in, const Discretization& disc, Space space);

}  // namespace mlpg
