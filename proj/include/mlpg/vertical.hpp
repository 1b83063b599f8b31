#pragma once

#include <array>
#include <vector>

#include "mlpg/mesh.hpp"

namespace mlpg {

/// Which vertical test space is in use: sigma_a (homogeneous Dirichlet on top
/// and bottom) or the shifted sigma-hat_a basis (free on the top surface).
enum class Layout { dirichlet, neumann };

/// Affine function c0 + c1 * (z - origin) on one elementary interval.
struct Affine {
  double origin = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;

  double operator()(double z) const { return c0 + c1 * (z - origin); }
};

/// Piecewise-affine test basis sigma_1..sigma_N on a knot set. sigma_a is
/// one at knot a and zero at every other knot.
class VerticalBasis {
 public:
  VerticalBasis(const LayerGrid& grid, Layout layout);

  const LayerGrid& grid() const { return grid_; }
  Layout layout() const { return layout_; }
  int size() const { return grid_.layers; }
  const std::vector<double>& knots() const { return knots_; }

  /// Sorted union of knots and layer interfaces. Every basis function and
  /// every layer indicator is affine between two consecutive breakpoints.
  const std::vector<double>& breakpoints() const { return breaks_; }

  /// Index of the layer (1-based) containing ]lo, hi[.
  int layer_of(double lo, double hi) const;

  /// sigma_a restricted to the elementary interval [lo, hi] (1-based a).
  Affine test_piece(int a, double lo, double hi) const;

  /// kappa_b restricted to [lo, hi]: constant one or zero.
  Affine trial_piece(int b, double lo, double hi) const;

  double value(int a, double z) const;

 private:
  int knot_interval(double lo, double hi) const;

  LayerGrid grid_;
  Layout layout_;
  std::vector<double> knots_;
  std::vector<double> breaks_;
};

/// Exact integrals of z^p times products of vertical basis functions over
/// the full column, stored as tridiagonal bands. Entry (a, b) always has the
/// test function index a and the trial function index b.
class VerticalMomentTable {
 public:
  enum Kind {
    kappa_sigma,    // int z^p kappa_b sigma_a
    kappa_dsigma,   // int z^p kappa_b sigma'_a
    sigma_sigma,    // int z^p sigma_b sigma_a
    dsigma_sigma,   // int z^p sigma'_b sigma_a
    dsigma_dsigma,  // int z^p sigma'_b sigma'_a
    kind_count
  };
  static constexpr int max_power = 2;

  VerticalMomentTable() = default;
  explicit VerticalMomentTable(const VerticalBasis& basis);

  int size() const { return n_; }

  /// 1-based indices; zero outside the band |a - b| <= 1.
  double operator()(Kind kind, int p, int a, int b) const;

  /// The same integrands over an arbitrary subinterval [lo, hi].
  static double integrate(const VerticalBasis& basis, Kind kind, int p, int a, int b, double lo,
                          double hi);

 private:
  int n_ = 0;
  // band_[kind][p][a-1][b-a+1]
  std::array<std::array<std::vector<std::array<double, 3>>, max_power + 1>, kind_count> band_{};
};

/// Vertical moment table for a grid and layout. Neumann requires N >= 3.
VerticalMomentTable vertical_moments(const LayerGrid& grid, Layout layout);

/// int_lo^hi z^p f(z) g(z) dz for affine f, g, evaluated in local coordinates.
double integrate_affine_product(int p, const Affine& f, const Affine& g, double lo, double hi);

}  // namespace mlpg
