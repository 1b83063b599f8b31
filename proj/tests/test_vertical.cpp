#include <gtest/gtest.h>

#include <cmath>

#include "mlpg/error.hpp"
#include "mlpg/vertical.hpp"
#include "oracle.hpp"

using namespace mlpg;
using K = VerticalMomentTable;

TEST(VerticalBasis, HatsMatchKnots) {
  const LayerGrid g = build_layer_grid(1.0, 5);
  for (Layout layout : {Layout::dirichlet, Layout::neumann}) {
    const VerticalBasis basis(g, layout);
    const auto& k = basis.knots();
    for (int a = 1; a <= basis.size(); ++a) {
      for (int j = 0; j < static_cast<int>(k.size()); ++j)
        EXPECT_NEAR(basis.value(a, k[j]), j == a ? 1.0 : 0.0, 1e-15);
    }
  }
}

TEST(VerticalMoments, BottomHalfIntervalSlope) {
  const LayerGrid g = build_layer_grid(1.0, 4);
  const VerticalBasis basis(g, Layout::dirichlet);
  const double h = g.thickness;
  EXPECT_NEAR(K::integrate(basis, K::dsigma_dsigma, 0, 1, 1, 0.0, 0.5 * h), 2.0 / h, 1e-13);
}

TEST(VerticalMoments, FirstLayerMass) {
  const LayerGrid g = build_layer_grid(1.0, 4);
  const auto t = vertical_moments(g, Layout::dirichlet);
  EXPECT_NEAR(t(K::kappa_sigma, 0, 1, 1), 5 * g.thickness / 8, 1e-15);
}

TEST(VerticalMoments, NeighbourSlopeProduct) {
  const LayerGrid g = build_layer_grid(1.0, 6);
  const VerticalBasis basis(g, Layout::dirichlet);
  const double h = g.thickness;
  for (int a = 1; a < 6; ++a) {
    EXPECT_NEAR(K::integrate(basis, K::dsigma_dsigma, 0, a, a + 1, g.midpoints[a - 1], g.midpoints[a]),
                -1.0 / h, 1e-12);
  }
}

TEST(VerticalMoments, FlatWeightTableForFourLayers) {
  const LayerGrid g = build_layer_grid(1.0, 4);
  const auto t = vertical_moments(g, Layout::dirichlet);
  const double h = g.thickness;
  const double S[4] = {5 * h / 8, 3 * h / 4, 3 * h / 4, 5 * h / 8};
  const double D[4] = {3 / h, 2 / h, 2 / h, 3 / h};
  for (int a = 1; a <= 4; ++a) {
    EXPECT_NEAR(t(K::kappa_sigma, 0, a, a), S[a - 1], 1e-14);
    EXPECT_NEAR(t(K::dsigma_dsigma, 0, a, a), D[a - 1], 1e-12);
    if (a < 4) {
      EXPECT_NEAR(t(K::kappa_sigma, 0, a, a + 1), h / 8, 1e-14);
      EXPECT_NEAR(t(K::kappa_sigma, 0, a + 1, a), h / 8, 1e-14);
      EXPECT_NEAR(t(K::dsigma_dsigma, 0, a, a + 1), -1 / h, 1e-12);
    }
  }
  EXPECT_EQ(t(K::kappa_sigma, 0, 1, 3), 0.0);
}

TEST(VerticalMoments, NeumannTopInterval) {
  const LayerGrid g = build_layer_grid(1.0, 5);
  const VerticalBasis basis(g, Layout::neumann);
  const double h = g.thickness;
  EXPECT_NEAR(K::integrate(basis, K::dsigma_dsigma, 0, 5, 5, g.midpoints[3], 1.0), 2.0 / (3 * h), 1e-12);
}

TEST(VerticalMoments, NeumannNeedsThreeLayers) {
  const LayerGrid g = build_layer_grid(1.0, 2);
  try {
    vertical_moments(g, Layout::neumann);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported_layer_count);
  }
}

TEST(VerticalMoments, AllKindsMatchBruteForce) {
  for (Layout layout : {Layout::dirichlet, Layout::neumann}) {
    for (int n : {3, 4, 9}) {
      const double L = 1.7;
      const LayerGrid g = build_layer_grid(L, n);
      const auto t = vertical_moments(g, layout);
      const auto hat = oracle::hats(L, n, layout == Layout::neumann);
      const auto pts = oracle::vertical_points(L, n);
      const double h = g.thickness;
      for (int p = 0; p <= 2; ++p) {
        for (int a = 1; a <= n; ++a) {
          for (int b = 1; b <= n; ++b) {
            double ks = 0, kds = 0, ss = 0, dss = 0, dsds = 0;
            for (const auto& q : pts) {
              const double zp = std::pow(q.z, p);
              const double kb = oracle::indicator(b, q.z, h);
              ks += q.w * zp * kb * hat.value(a, q.z);
              kds += q.w * zp * kb * hat.slope(a, q.z);
              ss += q.w * zp * hat.value(b, q.z) * hat.value(a, q.z);
              dss += q.w * zp * hat.slope(b, q.z) * hat.value(a, q.z);
              dsds += q.w * zp * hat.slope(b, q.z) * hat.slope(a, q.z);
            }
            const double tol = 1e-12 * (1 + std::abs(dsds));
            EXPECT_NEAR(t(K::kappa_sigma, p, a, b), ks, tol);
            EXPECT_NEAR(t(K::kappa_dsigma, p, a, b), kds, tol);
            EXPECT_NEAR(t(K::sigma_sigma, p, a, b), ss, tol);
            EXPECT_NEAR(t(K::dsigma_sigma, p, a, b), dss, tol);
            EXPECT_NEAR(t(K::dsigma_dsigma, p, a, b), dsds, tol);
          }
        }
      }
    }
  }
}

TEST(AffineProduct, MonomialWeights) {
  const Affine one{0.0, 1.0, 0.0};
  const Affine z{0.0, 0.0, 1.0};
  EXPECT_NEAR(integrate_affine_product(0, one, one, 0.0, 2.0), 2.0, 1e-15);
  EXPECT_NEAR(integrate_affine_product(2, z, z, 0.0, 1.0), 0.2, 1e-15);
  EXPECT_NEAR(integrate_affine_product(1, z, one, 1.0, 2.0), 7.0 / 3.0, 1e-14);
}
