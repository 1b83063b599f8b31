#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include <boost/math/quadrature/gauss.hpp>

#include "mlpg/hfem.hpp"
#include "mlpg/mesh.hpp"

using namespace mlpg;

namespace {

constexpr double pi = 3.14159265358979323846;

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

// Bivariate polynomial with exact integration over the unit reference
// triangle: int x^a y^b = a! b! / (a + b + 2)!.
using Poly = std::map<std::pair<int, int>, double>;

Poly mul(const Poly& p, const Poly& q) {
  Poly r;
  for (const auto& [e1, c1] : p)
    for (const auto& [e2, c2] : q) r[{e1.first + e2.first, e1.second + e2.second}] += c1 * c2;
  return r;
}

double integrate_ref_triangle(const Poly& p) {
  auto fact = [](int n) {
    double f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  };
  double s = 0;
  for (const auto& [e, c] : p) s += c * fact(e.first) * fact(e.second) / fact(e.first + e.second + 2);
  return s;
}

HorizontalMesh reference_triangle() {
  HorizontalMesh m;
  m.dim = 2;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.cells = {{0, 1, 2}};
  m.on_boundary = {true, true, true};
  return m;
}

// Integral of f over [0,1]^2 split into the mesh cells, using a collapsed
// 10x10 Gauss product on each triangle.
template <class F>
double triangle_integral(const std::array<double, 2>& p0, const std::array<double, 2>& p1,
                         const std::array<double, 2>& p2, F f) {
  using G = boost::math::quadrature::gauss<double, 10>;
  const double det = std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
  return G::integrate(
      [&](double u) {
        return G::integrate(
            [&](double v) {
              // Duffy: (u, v) in [0,1]^2 -> (s, t) = (u, (1 - u) v)
              const double s = u, t = (1 - u) * v;
              const double x = p0[0] + s * (p1[0] - p0[0]) + t * (p2[0] - p0[0]);
              const double y = p0[1] + s * (p1[1] - p0[1]) + t * (p2[1] - p0[1]);
              return f(x, y, 1 - s - t, s, t) * (1 - u) * det;
            },
            0.0, 1.0);
      },
      0.0, 1.0);
}

}  // namespace

TEST(Stiffness, OneDimensionalTridiagonal) {
  const auto sm = build_structured_mesh(1, 4);
  const auto A = dense(assemble_weighted_stiffness(sm.mesh, sm.dofs, constant_field(1.0)));
  ASSERT_EQ(A.rows(), 3);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(A(i, i), 8.0, 1e-13);
    if (i + 1 < 3) {
      EXPECT_NEAR(A(i, i + 1), -4.0, 1e-13);
      EXPECT_NEAR(A(i + 1, i), -4.0, 1e-13);
    }
  }
  EXPECT_NEAR(A(0, 2), 0.0, 0.0);
}

TEST(Stiffness, ZeroCoefficient) {
  const auto sm = build_structured_mesh(2, 4);
  const auto A = dense(assemble_weighted_stiffness(sm.mesh, sm.dofs, constant_field(0.0)));
  EXPECT_EQ(A.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Stiffness, CenterVertexOfTwoByTwoSquare) {
  const auto sm = build_structured_mesh(2, 2);
  const auto A = dense(assemble_weighted_stiffness(sm.mesh, sm.dofs, constant_field(1.0)));
  ASSERT_EQ(A.rows(), 1);
  EXPECT_NEAR(A(0, 0), 4.0, 1e-13);

  // Oracle: integrate |grad phi|^2 of the center hat over the 8 triangles,
  // with the gradient taken by central differences of the hat itself.
  const int center = sm.dofs.dof_to_vertex[0];
  double sum = 0.0;
  for (const auto& cell : sm.mesh.cells) {
    int local = -1;
    for (int k = 0; k < 3; ++k)
      if (cell[k] == center) local = k;
    if (local < 0) continue;
    const auto& p0 = sm.mesh.vertices[cell[0]];
    const auto& p1 = sm.mesh.vertices[cell[1]];
    const auto& p2 = sm.mesh.vertices[cell[2]];
    auto bary = [&](double x, double y) {
      const double d = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
      const double s = ((x - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (y - p0[1])) / d;
      const double t = ((p1[0] - p0[0]) * (y - p0[1]) - (x - p0[0]) * (p1[1] - p0[1])) / d;
      const std::array<double, 3> l{1 - s - t, s, t};
      return l[local];
    };
    sum += triangle_integral(p0, p1, p2, [&](double x, double y, double, double, double) {
      const double e = 1e-6;
      const double gx = (bary(x + e, y) - bary(x - e, y)) / (2 * e);
      const double gy = (bary(x, y + e) - bary(x, y - e)) / (2 * e);
      return gx * gx + gy * gy;
    });
  }
  EXPECT_NEAR(sum, 4.0, 1e-6);
}

TEST(Stiffness, SymmetricPositiveDefinite) {
  const auto sm = build_structured_mesh(2, 6);
  const auto A = dense(assemble_weighted_stiffness(
      sm.mesh, sm.dofs, [](const HorizontalPoint& p) { return 1.0 + p.x * p.y; }));
  EXPECT_LT((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int s = 0; s < 100; ++s) {
    Eigen::VectorXd v(A.rows());
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = U(rng);
    EXPECT_GT(v.dot(A * v), 0.0);
  }
}

TEST(Mass, OneDimensionalTridiagonal) {
  const auto sm = build_structured_mesh(1, 4);
  const auto M = dense(assemble_weighted_mass(sm.mesh, sm.dofs, constant_field(1.0)));
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(M(i, i), 1.0 / 6.0, 1e-15);
    if (i + 1 < 3) {
      EXPECT_NEAR(M(i, i + 1), 1.0 / 24.0, 1e-15);
    }
  }
}

TEST(Mass, FullRowSumsArePartitionOfUnity) {
  for (int dim : {1, 2}) {
    const auto sm = build_structured_mesh(dim, 5);
    const auto full = full_dof_map(sm.mesh);
    const auto M = dense(assemble_weighted_mass(sm.mesh, full, constant_field(1.0)));
    const Eigen::VectorXd rows = M.rowwise().sum();
    const auto phi = assemble_load(sm.mesh, full, constant_field(1.0));
    EXPECT_LT((rows - phi).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(M.sum(), 1.0, 1e-13);
  }
}

TEST(Mass, LinearWeightMatchesGaussOracle) {
  const int NH = 6;
  const auto sm = build_structured_mesh(1, NH);
  const auto M = dense(assemble_weighted_mass(sm.mesh, sm.dofs,
                                              [](const HorizontalPoint& p) { return p.x; }));
  EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-16);
  const double k = 1.0 / NH;
  auto hat = [k](int i, double x) {  // dof i sits at vertex i+1
    const double xi = (i + 1) * k;
    return std::max(0.0, 1.0 - std::abs(x - xi) / k);
  };
  using G = boost::math::quadrature::gauss<double, 3>;
  for (int i = 0; i < NH - 1; ++i) {
    for (int j = 0; j < NH - 1; ++j) {
      double ref = 0.0;
      for (int c = 0; c < NH; ++c)
        ref += G::integrate([&](double x) { return x * hat(i, x) * hat(j, x); }, c * k, (c + 1) * k);
      EXPECT_NEAR(M(i, j), ref, 1e-14);
    }
  }
}

TEST(Quadrature, ExactOnQuadraticWeightsOverOneTriangle) {
  const auto m = reference_triangle();
  const auto full = full_dof_map(m);
  const std::array<Poly, 3> lam{Poly{{{0, 0}, 1.0}, {{1, 0}, -1.0}, {{0, 1}, -1.0}},
                                Poly{{{1, 0}, 1.0}}, Poly{{{0, 1}, 1.0}}};
  const Poly weight{{{2, 0}, 1.0}, {{1, 1}, -0.5}, {{0, 0}, 0.25}};
  const auto M = dense(assemble_weighted_mass(m, full, [](const HorizontalPoint& p) {
    return p.x * p.x - 0.5 * p.x * p.y + 0.25;
  }));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(M(i, j), integrate_ref_triangle(mul(weight, mul(lam[i], lam[j]))), 1e-15);
}

TEST(GradientCoupling, ZeroField) {
  const auto sm = build_structured_mesh(2, 4);
  const auto C = dense(assemble_gradient_coupling(sm.mesh, sm.dofs, constant_vector_field(0, 0)));
  EXPECT_EQ(C.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GradientCoupling, ConstantFieldIsSkew) {
  const auto sm1 = build_structured_mesh(1, 7);
  const auto C1 = dense(assemble_gradient_coupling(sm1.mesh, sm1.dofs, constant_vector_field(1.7, 0)));
  EXPECT_LT((C1 + C1.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GT(C1.cwiseAbs().maxCoeff(), 0.1);
  const auto sm2 = build_structured_mesh(2, 5);
  const auto C2 = dense(assemble_gradient_coupling(sm2.mesh, sm2.dofs, constant_vector_field(0.3, -1.2)));
  EXPECT_LT((C2 + C2.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GradientCoupling, SingleDofPatch) {
  const auto sm = build_structured_mesh(2, 2);
  const auto C = dense(assemble_gradient_coupling(sm.mesh, sm.dofs, constant_vector_field(1, 0)));
  EXPECT_NEAR(C(0, 0), 0.0, 1e-15);
}

TEST(GradientCoupling, MatchesPolynomialOracle) {
  // b = (x, 2y) on one triangle: C_ij = int (b . grad lam_j) lam_i
  const auto m = reference_triangle();
  const auto full = full_dof_map(m);
  const auto C = dense(assemble_gradient_coupling(
      m, full, [](const HorizontalPoint& p) { return std::array<double, 2>{p.x, 2 * p.y}; }));
  const std::array<Poly, 3> lam{Poly{{{0, 0}, 1.0}, {{1, 0}, -1.0}, {{0, 1}, -1.0}},
                                Poly{{{1, 0}, 1.0}}, Poly{{{0, 1}, 1.0}}};
  const std::array<std::array<double, 2>, 3> grad{{{-1, -1}, {1, 0}, {0, 1}}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Poly bgrad{{{1, 0}, grad[j][0]}, {{0, 1}, 2 * grad[j][1]}};
      EXPECT_NEAR(C(i, j), integrate_ref_triangle(mul(bgrad, lam[i])), 1e-15);
    }
  }
}

TEST(Load, ConstantOneDimensional) {
  const auto sm = build_structured_mesh(1, 4);
  const auto b = assemble_load(sm.mesh, sm.dofs, constant_field(1.0));
  for (Eigen::Index i = 0; i < b.size(); ++i) EXPECT_NEAR(b[i], 0.25, 1e-15);
  EXPECT_EQ(assemble_load(sm.mesh, sm.dofs, constant_field(0.0)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Load, SineProductMatchesRefinedOracle) {
  const auto sm = build_structured_mesh(2, 10);
  auto f = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  const auto b = assemble_load(sm.mesh, sm.dofs,
                               [&](const HorizontalPoint& p) { return f(p.x, p.y); });
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(b.size());
  for (const auto& cell : sm.mesh.cells) {
    const auto& p0 = sm.mesh.vertices[cell[0]];
    const auto& p1 = sm.mesh.vertices[cell[1]];
    const auto& p2 = sm.mesh.vertices[cell[2]];
    for (int k = 0; k < 3; ++k) {
      const int i = sm.dofs.vertex_to_dof[cell[k]];
      if (i < 0) continue;
      ref[i] += triangle_integral(p0, p1, p2, [&](double x, double y, double l0, double l1, double l2) {
        const std::array<double, 3> l{l0, l1, l2};
        return f(x, y) * l[k];
      });
    }
  }
  // The degree-4 six-point rule lands near 2.4e-10 here.
  EXPECT_LT((b - ref).cwiseAbs().maxCoeff(), 5e-10);
}

TEST(Interpolant, GradientOfLinearFunctionIsExact) {
  const auto sm = build_structured_mesh(2, 4);
  const auto g = gradient_of_interpolant(sm.mesh, [](const HorizontalPoint& p) { return 2 * p.x - 3 * p.y + 1; });
  for (std::size_t c = 0; c < sm.mesh.num_cells(); ++c) {
    const auto v = g(HorizontalPoint{0.5, 0.5, c});
    EXPECT_NEAR(v[0], 2.0, 1e-13);
    EXPECT_NEAR(v[1], -3.0, 1e-13);
  }
}
