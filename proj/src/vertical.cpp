#include "mlpg/vertical.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlpg/error.hpp"

namespace mlpg {

VerticalBasis::VerticalBasis(const LayerGrid& grid, Layout layout)
    : grid_(grid), layout_(layout) {
  if (layout == Layout::neumann && grid.layers < 3) {
    throw Error(ErrorCode::unsupported_layer_count,
                "the top-Neumann test space needs N >= 3, got " + std::to_string(grid.layers));
  }
  knots_ = layout == Layout::dirichlet ? grid.dirichlet_knots() : grid.neumann_knots();
  breaks_ = knots_;
  breaks_.insert(breaks_.end(), grid.interfaces.begin(), grid.interfaces.end());
  std::sort(breaks_.begin(), breaks_.end());
  const double tol = 1e-12 * grid.height;
  breaks_.erase(std::unique(breaks_.begin(), breaks_.end(),
                            [tol](double a, double b) { return std::abs(a - b) <= tol; }),
                breaks_.end());
}

int VerticalBasis::layer_of(double lo, double hi) const {
  const double mid = 0.5 * (lo + hi);
  const int layer = static_cast<int>(std::floor(mid / grid_.thickness)) + 1;
  return std::clamp(layer, 1, grid_.layers);
}

int VerticalBasis::knot_interval(double lo, double hi) const {
  const double mid = 0.5 * (lo + hi);
  auto it = std::upper_bound(knots_.begin(), knots_.end(), mid);
  const auto j = static_cast<int>(it - knots_.begin()) - 1;
  return std::clamp(j, 0, static_cast<int>(knots_.size()) - 2);
}

Affine VerticalBasis::test_piece(int a, double lo, double hi) const {
  const int j = knot_interval(lo, hi);
  const double t0 = knots_[j];
  const double t1 = knots_[j + 1];
  const double len = t1 - t0;
  if (a == j + 1) return {lo, (lo - t0) / len, 1.0 / len};
  if (a == j) return {lo, (t1 - lo) / len, -1.0 / len};
  return {lo, 0.0, 0.0};
}

Affine VerticalBasis::trial_piece(int b, double lo, double hi) const {
  return {lo, layer_of(lo, hi) == b ? 1.0 : 0.0, 0.0};
}

double VerticalBasis::value(int a, double z) const {
  if (z <= knots_.front() || z > knots_.back()) return 0.0;
  auto it = std::lower_bound(knots_.begin(), knots_.end(), z);
  const auto j = static_cast<int>(it - knots_.begin()) - 1;
  return test_piece(a, knots_[j], knots_[j + 1])(z);
}

double integrate_affine_product(int p, const Affine& f, const Affine& g, double lo, double hi) {
  const double len = hi - lo;
  // Rewrite both factors in s = z - lo.
  const double f0 = f.c0 + f.c1 * (lo - f.origin);
  const double g0 = g.c0 + g.c1 * (lo - g.origin);
  const std::array<double, 3> prod{f0 * g0, f0 * g.c1 + f.c1 * g0, f.c1 * g.c1};
  // z^p = sum_k binom(p, k) lo^(p-k) s^k
  static constexpr int binom[3][3] = {{1, 0, 0}, {1, 1, 0}, {1, 2, 1}};
  double total = 0.0;
  for (int k = 0; k <= p; ++k) {
    const double zk = binom[p][k] * std::pow(lo, p - k);
    for (int m = 0; m < 3; ++m) {
      const int e = k + m;
      total += zk * prod[m] * std::pow(len, e + 1) / (e + 1);
    }
  }
  return total;
}

double VerticalMomentTable::integrate(const VerticalBasis& basis, Kind kind, int p, int a, int b,
                                      double lo, double hi) {
  const auto& br = basis.breakpoints();
  double total = 0.0;
  for (std::size_t e = 0; e + 1 < br.size(); ++e) {
    const double elo = std::max(lo, br[e]);
    const double ehi = std::min(hi, br[e + 1]);
    if (ehi <= elo) continue;
    // Pieces are determined by the elementary interval, not by the clipped one.
    const double blo = br[e];
    const double bhi = br[e + 1];
    const Affine test = basis.test_piece(a, blo, bhi);
    const Affine dtest{blo, test.c1, 0.0};
    Affine trial;
    switch (kind) {
      case kappa_sigma:
      case kappa_dsigma:
        trial = basis.trial_piece(b, blo, bhi);
        break;
      case sigma_sigma:
        trial = basis.test_piece(b, blo, bhi);
        break;
      case dsigma_sigma:
      case dsigma_dsigma:
        trial = Affine{blo, basis.test_piece(b, blo, bhi).c1, 0.0};
        break;
      default:
        throw Error(ErrorCode::invalid_argument, "unknown moment kind");
    }
    const bool derivative_test = kind == kappa_dsigma || kind == dsigma_dsigma;
    total += integrate_affine_product(p, trial, derivative_test ? dtest : test, elo, ehi);
  }
  return total;
}

VerticalMomentTable::VerticalMomentTable(const VerticalBasis& basis) : n_(basis.size()) {
  const double lo = basis.grid().bottom();
  const double hi = basis.grid().top();
  for (int kind = 0; kind < kind_count; ++kind) {
    for (int p = 0; p <= max_power; ++p) {
      auto& rows = band_[kind][p];
      rows.assign(n_, {0.0, 0.0, 0.0});
      for (int a = 1; a <= n_; ++a) {
        for (int off = -1; off <= 1; ++off) {
          const int b = a + off;
          if (b < 1 || b > n_) continue;
          rows[a - 1][off + 1] = integrate(basis, static_cast<Kind>(kind), p, a, b, lo, hi);
        }
      }
    }
  }
}

double VerticalMomentTable::operator()(Kind kind, int p, int a, int b) const {
  const int off = b - a;
  if (off < -1 || off > 1 || a < 1 || a > n_ || b < 1 || b > n_) return 0.0;
  return band_[kind][p][a - 1][off + 1];
}

VerticalMomentTable vertical_moments(const LayerGrid& grid, Layout layout) {
  return VerticalMomentTable(VerticalBasis(grid, layout));
}

}  // namespace mlpg
